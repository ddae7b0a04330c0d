#include "bayinv/exec.hpp"

#include <omp.h>

namespace bayinv {

int worker_threads()
{
  return omp_get_max_threads();
}

} // namespace bayinv
