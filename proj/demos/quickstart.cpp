//
// Minimal end-to-end run of the library: build a Fourier-Sobolev model,
// draw a concentration-certified batch for m = 8, subsample it to O(m)
// points, assemble the recovery plan, and print the certified error report
// together with a single recovered test function.
//

#include <cstdio>

#include "samplerec/analysis.hpp"
#include "samplerec/density.hpp"
#include "samplerec/models.hpp"
#include "samplerec/recovery.hpp"
#include "samplerec/subsample.hpp"

int main() {
  using namespace samplerec;

  const SpectralModel model = fourier_sobolev(1.0, 0.0, 128, 256);
  const Index m = 8;
  const int budget = 60 * static_cast<int>(m);

  const Index n = default_sample_count(8.0, m);
  const SampleBatch batch = resample_until_concentrated(model, m, n, 0.5, 20, 1);
  std::printf("drew n=%lld points, residual %.4f after %d attempt(s)\n",
              static_cast<long long>(batch.n()), batch.residual, batch.attempts);

  const FiniteReduction red = reduce_to_finite(batch);
  const PaddedSystem sys = pad_identity(red, batch.n(), m);
  const SubsampleCertificate picked = greedy_sparsify(sys, m, budget);
  const SubsampleCertificate cert = certify(batch, picked.selected, m, budget);
  std::printf("subsampled to |J|=%zu, head_floor=%.4f, full_cap=%.4f\n", cert.selected.size(),
              cert.head_floor, cert.full_cap);

  const RecoveryPlan plan = build_plan(model, batch, cert);
  const ErrorReport rep = make_error_report(model, plan, n, batch.attempts, 1, 1.0, 0.0);
  std::printf("g_emp_ls=%.6g  g_emp_spline=%.6g  d_m=%.6g\n", rep.g_emp_ls, rep.g_emp_spline,
              rep.d_m);
  std::printf("bound_main=%.6g  ratio_main=%.3f  ratio_local=%.4f\n", rep.bound_main,
              rep.ratio_main, rep.ratio_local);

  // Recover a pure head mode: the plan reproduces it exactly.
  Vector coeffs = Vector::Zero(m);
  coeffs(3) = 1.0;
  const Vector f = head_function(model, coeffs);
  const Vector ghat = recover(plan, sample_at(plan, f));
  std::printf("recovered b_3 coefficient: %.12f%+.12fi\n", ghat(3).real(), ghat(3).imag());
  return 0;
}
