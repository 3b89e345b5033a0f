#pragma once

namespace dhnet {

// Keeps large freed blocks in the heap instead of returning them to the OS,
// so per-batch activation tensors do not page-fault on every allocation.
// No-op outside glibc.
void tune_allocator();

}  // namespace dhnet
