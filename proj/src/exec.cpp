#include "qm/exec.hpp"

#include <omp.h>

namespace qm {

void set_threads(int n) {
    static const int default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : default_threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace qm
