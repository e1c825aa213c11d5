#pragma once

namespace earshot {

// Worker count for all OpenMP regions. Work is always partitioned into a
// fixed chunk grid derived from tensor shapes, so numerical results do not
// depend on this value; it only controls how chunks map onto threads.
void set_num_workers(int n);
int num_workers();

// Index of the calling thread inside an OpenMP region (0 outside).
int worker_index();

}  // namespace earshot
