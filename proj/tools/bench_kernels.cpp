// Times the OpenMP kernels against their serial reference on the bundled
// synthetic task: tree fitting, GBT fitting, batch prediction, and a small
// grid search. Results must agree bit-for-bit; this just reports speed.
#include <chrono>
#include <cstdio>

#include "ensalloc/gbt.hpp"
#include "ensalloc/grid_search.hpp"
#include "ensalloc/parallel.hpp"
#include "ensalloc/synthetic.hpp"

using namespace ensalloc;
namespace chrono = std::chrono;

namespace {

template <typename F>
double time_ms(F&& body, int repeats) {
  const auto t0 = chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) body();
  const auto t1 = chrono::steady_clock::now();
  return chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 20000;
  if (argc > 1) n = std::atoi(argv[1]);
  std::printf("n = %d, workers = %d\n", n, worker_count());

  const Dataset data = gen_complementary_2d(n, 42, 0.05);

  TreeParams tree_params{2, 256, 8};
  report("fit_tree",
         time_ms([&] { fit_tree(data, tree_params, Execution::serial); }, 3),
         time_ms([&] { fit_tree(data, tree_params, Execution::parallel); }, 3));

  GbtParams gbt_params{0.1, 64, 4, 1.0, 7};
  GradientBoostedTrees model = fit_gbt(data, gbt_params, Execution::parallel);
  report("fit_gbt",
         time_ms([&] { fit_gbt(data, gbt_params, Execution::serial); }, 1),
         time_ms([&] { fit_gbt(data, gbt_params, Execution::parallel); }, 1));

  report("batch_outputs",
         time_ms([&] { batch_outputs(model, data, Execution::serial); }, 3),
         time_ms([&] { batch_outputs(model, data, Execution::parallel); }, 3));

  HyperparameterGrid grid;
  grid.family = ModelFamily::tree;
  grid.min_split = {2, 8};
  grid.max_leaf = {64};
  grid.tree_max_depth = {4, 8};
  report("grid_search (tree, 4-fold)",
         time_ms([&] { grid_search(grid, data, 4, 3, Execution::serial); }, 1),
         time_ms([&] { grid_search(grid, data, 4, 3, Execution::parallel); }, 1));
  return 0;
}
