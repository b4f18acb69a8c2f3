#pragma once

// Slow, independent reference implementations used only by the tests:
// adaptive continuum quadrature (different algorithm and nodes from the
// library's fixed grids) and naive direct summation of the eigenbasis.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "ballwave/spectral.hpp"

namespace oracle {

// int_0^1 f(r) r^2 dr by adaptive quadrature.
inline double radial_integral(const std::function<double(double)>& f) {
  static const int kQuiet = [] {
    gsl_set_error_handler_off();
    return 0;
  }();
  (void)kQuiet;
  struct Payload {
    const std::function<double(double)>* fn;
  } payload{&f};
  gsl_function gf;
  gf.function = [](double r, void* p) -> double {
    const auto* pay = static_cast<const Payload*>(p);
    return (*pay->fn)(r)*r * r;
  };
  gf.params = &payload;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(8192);
  double result = 0.0, abserr = 0.0;
  const int status = gsl_integration_qags(&gf, 0.0, 1.0, 1e-13, 1e-11, 8192,
                                          ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  if (status != 0 && status != GSL_EROUND) {
    throw std::runtime_error("oracle::radial_integral: quadrature failed");
  }
  return result;
}

inline double basis(int n, double r) {
  return r == 0.0 ? std::sqrt(2.0) * ballwave::kPi * n
                  : std::sqrt(2.0) * std::sin(ballwave::kPi * n * r) / r;
}

inline std::complex<double> direct_sum(const ballwave::SpectralState& s,
                                       double r) {
  std::complex<double> acc{0.0, 0.0};
  for (int k = 0; k < s.n_modes(); ++k) acc += s.coeffs[k] * basis(k + 1, r);
  return acc;
}

}  // namespace oracle
