#pragma once

namespace ddkl {

// Thread cap for OpenMP loops. Reads DDKL_THREADS once; 0/unset means all
// hardware threads. Returns 1 when built without OpenMP.
int thread_cap();

// Runtime override; 0 restores the environment-derived cap.
void set_thread_cap(int n);

}  // namespace ddkl
