#include "quasicrit/runtime.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>

#include "quasicrit/spectral.hpp"

namespace qc {

void reexec_if_blas_faulty(char** argv) {
    if (lapack_healthy() || std::getenv("OPENBLAS_CORETYPE")) return;
    setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    std::fflush(nullptr);
    execv("/proc/self/exe", argv);
    std::perror("re-exec with OPENBLAS_CORETYPE failed");
}

}  // namespace qc
