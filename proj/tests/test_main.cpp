#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "quasicrit/runtime.hpp"

int main(int argc, char** argv) {
    qc::reexec_if_blas_faulty(argv);
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
