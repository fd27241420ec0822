#pragma once

namespace qc {

// If the LAPACK self-check fails and OPENBLAS_CORETYPE is unset, restart the
// process with OPENBLAS_CORETYPE=Haswell. The kernel is chosen when OpenBLAS
// loads, so this cannot be fixed in-process. Returns only if no restart happened.
void reexec_if_blas_faulty(char** argv);

}  // namespace qc
