#include "ensalloc/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ensalloc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& cell, std::size_t row,
                  const std::string& column) {
  const std::string t = trim(cell);
  if (t.empty()) {
    throw std::runtime_error("blank cell at row " + std::to_string(row) +
                             ", column '" + column + "'");
  }
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("non-numeric cell '" + t + "' at row " +
                             std::to_string(row) + ", column '" + column +
                             "'");
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, TaskKind task,
                 const std::string& target_column) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("file has no header row: " + path);
  }
  std::vector<std::string> header = split_line(line);
  for (std::string& h : header) h = trim(h);

  int target_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target_column) {
      target_idx = static_cast<int>(j);
      break;
    }
  }
  if (target_idx < 0) {
    throw std::runtime_error("target column '" + target_column +
                             "' not found in header of " + path);
  }

  Dataset data;
  data.task = task;
  data.target_name = target_column;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) != target_idx) data.feature_names.push_back(header[j]);
  }

  std::map<std::string, int> label_index;  // first-appearance order via counter
  std::size_t row = 1;                     // header is row 0
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      ++row;
      continue;
    }
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) +
                               " cells, header has " +
                               std::to_string(header.size()));
    }
    Observation obs;
    obs.id = static_cast<int>(data.observations.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == target_idx) continue;
      obs.x.push_back(parse_real(cells[j], row, header[j]));
    }
    const std::string target_cell = trim(cells[static_cast<std::size_t>(target_idx)]);
    if (task == TaskKind::classification) {
      auto it = label_index.find(target_cell);
      if (it == label_index.end()) {
        it = label_index.emplace(target_cell, static_cast<int>(data.class_labels.size()))
                 .first;
        data.class_labels.push_back(target_cell);
      }
      obs.y = it->second;
    } else {
      obs.y = parse_real(cells[static_cast<std::size_t>(target_idx)], row, target_column);
    }
    data.observations.push_back(std::move(obs));
    ++row;
  }

  if (data.observations.empty()) {
    throw std::runtime_error("no data rows in " + path);
  }
  data.n_classes = static_cast<int>(data.class_labels.size());
  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path);
  }
  out.precision(17);
  const int d = data.feature_dim();
  for (int j = 0; j < d; ++j) {
    if (j < static_cast<int>(data.feature_names.size())) {
      out << data.feature_names[static_cast<std::size_t>(j)];
    } else {
      out << "x" << j;
    }
    out << ',';
  }
  out << data.target_name << '\n';
  for (const Observation& obs : data.observations) {
    for (double v : obs.x) out << v << ',';
    if (data.task == TaskKind::classification &&
        obs.label() < static_cast<int>(data.class_labels.size())) {
      out << data.class_labels[static_cast<std::size_t>(obs.label())];
    } else {
      out << obs.y;
    }
    out << '\n';
  }
}

void save_sidecar(const Dataset& data, const std::optional<Scaler>& scaler,
                  const std::string& path) {
  nlohmann::ordered_json j;
  j["task"] = to_string(data.task);
  j["n_classes"] = data.n_classes;
  j["target_column"] = data.target_name;
  j["class_labels"] = data.class_labels;
  if (scaler) {
    nlohmann::ordered_json s;
    s["feature_min"] = scaler->feature_min;
    s["feature_max"] = scaler->feature_max;
    s["scales_response"] = scaler->scales_response;
    s["response_min"] = scaler->response_min;
    s["response_max"] = scaler->response_max;
    j["scaler"] = std::move(s);
  } else {
    j["scaler"] = nullptr;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sidecar: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ensalloc
