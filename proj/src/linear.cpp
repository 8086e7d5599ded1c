#include "ensalloc/linear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensalloc {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kRelObjectiveTol = 1e-7;
constexpr double kGradMapTol = 1e-6;

struct Problem {
  int n = 0;
  int d = 0;       // features (without intercept)
  int k = 0;       // weight rows (n_classes or 1)
  bool classification = false;
  std::vector<double> x;   // row-major n x d
  std::vector<int> yi;     // class indices
  std::vector<double> yr;  // responses

  int cols() const { return d + 1; }

  // smooth loss and its gradient at w (k x (d+1), intercept last)
  double loss_grad(const std::vector<double>& w, std::vector<double>* grad) const {
    if (grad) grad->assign(w.size(), 0.0);
    double total = 0.0;
    std::vector<double> scores(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
      const double* xi = x.data() + static_cast<std::size_t>(i) * d;
      if (classification) {
        for (int c = 0; c < k; ++c) {
          const double* row = w.data() + static_cast<std::size_t>(c) * cols();
          double s = row[d];
          for (int j = 0; j < d; ++j) s += row[j] * xi[j];
          scores[static_cast<std::size_t>(c)] = s;
        }
        const double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (int c = 0; c < k; ++c) z += std::exp(scores[static_cast<std::size_t>(c)] - mx);
        const double logz = mx + std::log(z);
        total += logz - scores[static_cast<std::size_t>(yi[static_cast<std::size_t>(i)])];
        if (grad) {
          for (int c = 0; c < k; ++c) {
            const double p = std::exp(scores[static_cast<std::size_t>(c)] - logz);
            const double coeff = p - (c == yi[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
            double* grow = grad->data() + static_cast<std::size_t>(c) * cols();
            for (int j = 0; j < d; ++j) grow[j] += coeff * xi[j];
            grow[d] += coeff;
          }
        }
      } else {
        const double* row = w.data();
        double s = row[d];
        for (int j = 0; j < d; ++j) s += row[j] * xi[j];
        const double r = s - yr[static_cast<std::size_t>(i)];
        total += r * r;
        if (grad) {
          double* grow = grad->data();
          for (int j = 0; j < d; ++j) grow[j] += 2.0 * r * xi[j];
          grow[d] += 2.0 * r;
        }
      }
    }
    if (grad) {
      for (double& g : *grad) g /= n;
    }
    return total / n;
  }

  double penalty(const std::vector<double>& w, double lambda) const {
    double p = 0.0;
    for (int c = 0; c < k; ++c) {
      const double* row = w.data() + static_cast<std::size_t>(c) * cols();
      for (int j = 0; j < d; ++j) p += std::abs(row[j]);
    }
    return lambda * p;
  }

  // prox of lambda/L * ||.||_1 on non-intercept entries
  void prox(std::vector<double>& w, double shrink) const {
    for (int c = 0; c < k; ++c) {
      double* row = w.data() + static_cast<std::size_t>(c) * cols();
      for (int j = 0; j < d; ++j) {
        const double v = row[j];
        row[j] = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
      }
    }
  }
};

}  // namespace

LinearModel fit_linear(const Dataset& train, double l1_penalty) {
  train.validate();
  if (l1_penalty < 0.0) throw std::invalid_argument("l1_penalty must be >= 0");

  Problem p;
  p.n = train.size();
  p.d = train.feature_dim();
  p.classification = train.task == TaskKind::classification;
  p.k = p.classification ? train.n_classes : 1;
  p.x.resize(static_cast<std::size_t>(p.n) * p.d);
  for (int i = 0; i < p.n; ++i) {
    const Observation& obs = train.observations[static_cast<std::size_t>(i)];
    std::copy(obs.x.begin(), obs.x.end(), p.x.begin() + static_cast<std::size_t>(i) * p.d);
    if (p.classification) {
      p.yi.push_back(obs.label());
    } else {
      p.yr.push_back(obs.y);
    }
  }

  const std::size_t size = static_cast<std::size_t>(p.k) * p.cols();
  std::vector<double> w(size, 0.0), v(size, 0.0), w_prev(size, 0.0);
  std::vector<double> grad, candidate;

  double step_L = 1.0;
  double momentum_t = 1.0;
  double objective = p.loss_grad(w, nullptr) + p.penalty(w, l1_penalty);
  if (!std::isfinite(objective)) {
    throw std::runtime_error("non-finite objective at start; check scaling");
  }

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const double fv = p.loss_grad(v, &grad);
    if (!std::isfinite(fv)) {
      throw std::runtime_error("non-finite objective during fit; check scaling");
    }

    double f_new = 0.0;
    while (true) {  // backtracking on the smooth part
      candidate = v;
      for (std::size_t j = 0; j < size; ++j) candidate[j] -= grad[j] / step_L;
      p.prox(candidate, l1_penalty / step_L);
      f_new = p.loss_grad(candidate, nullptr);
      double quad = fv;
      double sq = 0.0;
      for (std::size_t j = 0; j < size; ++j) {
        const double diff = candidate[j] - v[j];
        quad += grad[j] * diff;
        sq += diff * diff;
      }
      quad += 0.5 * step_L * sq;
      if (f_new <= quad + 1e-12 || step_L > 1e15) break;
      step_L *= 2.0;
    }

    double gmap_inf = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      gmap_inf = std::max(gmap_inf, std::abs(candidate[j] - v[j]) * step_L);
    }

    w_prev = w;
    w = candidate;
    const double objective_new = f_new + p.penalty(w, l1_penalty);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
    if (objective_new > objective) {  // adaptive restart
      momentum_t = 1.0;
      v = w;
    } else {
      const double beta = (momentum_t - 1.0) / t_next;
      for (std::size_t j = 0; j < size; ++j) {
        v[j] = w[j] + beta * (w[j] - w_prev[j]);
      }
      momentum_t = t_next;
    }

    const double rel_change =
        std::abs(objective - objective_new) / std::max(std::abs(objective), 1e-12);
    objective = objective_new;
    if (rel_change < kRelObjectiveTol && gmap_inf < kGradMapTol) break;
  }

  return LinearModel(train.task, p.d, train.n_classes, std::move(w), l1_penalty);
}

std::vector<double> LinearModel::predict_proba(std::span<const double> x) const {
  if (task_ != TaskKind::classification) {
    throw std::logic_error("predict_proba on a regression model");
  }
  check_input(x);
  const int cols = d_ + 1;
  std::vector<double> scores(static_cast<std::size_t>(k_));
  for (int c = 0; c < k_; ++c) {
    const double* row = weights_.data() + static_cast<std::size_t>(c) * cols;
    double s = row[d_];
    for (int j = 0; j < d_; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
    scores[static_cast<std::size_t>(c)] = s;
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : scores) s /= z;
  return scores;
}

double LinearModel::predict_value(std::span<const double> x) const {
  if (task_ != TaskKind::regression) {
    throw std::logic_error("predict_value on a classification model");
  }
  check_input(x);
  double s = weights_[static_cast<std::size_t>(d_)];
  for (int j = 0; j < d_; ++j) {
    s += weights_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  }
  return s;
}

nlohmann::ordered_json LinearModel::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = "linear";
  j["task"] = to_string(task_);
  j["feature_dim"] = d_;
  j["n_classes"] = k_;
  j["l1_penalty"] = l1_penalty_;
  j["weights"] = weights_;
  return j;
}

}  // namespace ensalloc
