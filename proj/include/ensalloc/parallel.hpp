#pragma once

namespace ensalloc {

// Every hot kernel (split search, batch prediction, grid-search sweep) exists
// in two variants: a plain serial loop kept as the reference, and an OpenMP
// version. Both must produce bit-identical results: parallel loops only fill
// independent slots and all reductions run serially in index order.
enum class Execution { serial, parallel };

// Number of worker threads the parallel variant would use right now.
int worker_count();

// Clamp OpenMP to `n` threads; n <= 0 restores the runtime default.
void set_worker_count(int n);

}  // namespace ensalloc
