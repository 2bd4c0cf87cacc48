#pragma once

namespace hyperrate {

// serial paths exist so the OpenMP kernels can be checked against them bit for bit.
enum class ExecutionPolicy { serial, parallel };

// HYPERRATE_THREADS if set and positive, else the OpenMP default.
int thread_count();
int threads_for(ExecutionPolicy policy);

}  // namespace hyperrate
