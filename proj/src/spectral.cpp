#include "ballwave/spectral.hpp"

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace ballwave {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// DST-I via FFTW (RODFT00): out_k = 2 sum_{j=1}^{L} in_j sin(pi j k / (L+1)),
// indices shifted down by one in storage. Plans are created once under the
// global planner lock with FFTW_UNALIGNED, so apply() works on arbitrary
// caller buffers and is safe to call concurrently.
// ---------------------------------------------------------------------------
class SineTransform {
 public:
  explicit SineTransform(int length) : length_(length) {
    std::vector<double> in(static_cast<std::size_t>(length), 0.0);
    std::vector<double> out(static_cast<std::size_t>(length), 0.0);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_r2r_1d(length, in.data(), out.data(), FFTW_RODFT00,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) {
      throw std::runtime_error("SineTransform: FFTW plan creation failed");
    }
  }

  ~SineTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  void apply(const double* in, double* out) const {
    fftw_execute_r2r(plan_, const_cast<double*>(in), out);
  }

  int length() const { return length_; }

 private:
  int length_;
  fftw_plan plan_;
};

// ---------------------------------------------------------------------------
// Basis
// ---------------------------------------------------------------------------

double eigenvalue(int n) {
  if (n < 1) {
    throw std::invalid_argument("eigenvalue: mode index must be >= 1, got " +
                                std::to_string(n));
  }
  return kPi * n;
}

double eval_basis(int n, double r) {
  if (n < 1) {
    throw std::invalid_argument("eval_basis: mode index must be >= 1, got " +
                                std::to_string(n));
  }
  if (!(r > 0.0) || r > 1.0) {
    throw std::domain_error("eval_basis: r must lie in (0,1], got " +
                            std::to_string(r));
  }
  const double x = kPi * n * r;
  if (r < 1e-8) {
    const double sinc = (x == 0.0) ? 1.0 : std::sin(x) / x;
    return kSqrt2 * kPi * n * sinc;
  }
  return kSqrt2 * std::sin(x) / r;
}

SpectralState SpectralState::zero(int n_modes) {
  if (n_modes < 0) {
    throw std::invalid_argument("SpectralState::zero: negative mode count");
  }
  SpectralState s;
  s.coeffs.assign(static_cast<std::size_t>(n_modes), {0.0, 0.0});
  return s;
}

bool SpectralState::finite() const {
  for (const auto& c : coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Quadratures
// ---------------------------------------------------------------------------

RadialQuadrature RadialQuadrature::uniform_sine(int grid_points) {
  if (grid_points < 8) {
    throw std::invalid_argument(
        "RadialQuadrature::uniform_sine: grid parameter must be >= 8, got " +
        std::to_string(grid_points));
  }
  RadialQuadrature q;
  q.kind_ = QuadKind::kUniformSine;
  q.grid_param_ = grid_points;
  q.capacity_ = grid_points / 8;
  const int m = grid_points;
  q.nodes_.resize(static_cast<std::size_t>(m - 1));
  q.weights_.resize(static_cast<std::size_t>(m - 1));
  for (int j = 1; j < m; ++j) {
    const double r = static_cast<double>(j) / m;
    q.nodes_[j - 1] = r;
    q.weights_[j - 1] = r * r / m;
  }
  q.dst_ = std::make_shared<SineTransform>(m - 1);
  return q;
}

RadialQuadrature RadialQuadrature::gauss_legendre(int n_points) {
  if (n_points < 8) {
    throw std::invalid_argument(
        "RadialQuadrature::gauss_legendre: need >= 8 nodes, got " +
        std::to_string(n_points));
  }
  RadialQuadrature q;
  q.kind_ = QuadKind::kGaussLegendre;
  q.grid_param_ = n_points;
  q.capacity_ = n_points / 8;
  gsl_integration_glfixed_table* table =
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n_points));
  if (table == nullptr) {
    throw std::runtime_error("RadialQuadrature::gauss_legendre: table alloc failed");
  }
  q.nodes_.resize(static_cast<std::size_t>(n_points));
  q.weights_.resize(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    double r = 0.0, w = 0.0;
    gsl_integration_glfixed_point(0.0, 1.0, static_cast<std::size_t>(i), &r, &w,
                                  table);
    q.nodes_[i] = r;
    q.weights_[i] = w * r * r;
  }
  gsl_integration_glfixed_table_free(table);
  return q;
}

double RadialQuadrature::integrate(std::span<const double> f) const {
  if (f.size() != nodes_.size()) {
    throw std::invalid_argument("RadialQuadrature::integrate: sample count " +
                                std::to_string(f.size()) + " != node count " +
                                std::to_string(nodes_.size()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += weights_[j] * f[j];
  return acc;
}

// ---------------------------------------------------------------------------
// Transforms. On the sine grid, synthesis and analysis both reduce to the
// DST-I of g(r) = r u(r) = sqrt(2) sum c_n sin(pi n r):
//   u(r_j)  = DST(c)_j / (sqrt(2) r_j)
//   c_n     = DST(r u)_n / (sqrt(2) M)
// and DST o DST = 2M id, so the pair round-trips exactly. Gauss-Legendre
// grids evaluate the same sums directly.
// ---------------------------------------------------------------------------

namespace {

void require_capacity(const char* op, int n_modes, const RadialQuadrature& q) {
  if (n_modes > q.capacity()) {
    throw CapacityError(std::string(op) + ": " + std::to_string(n_modes) +
                        " modes exceed quadrature capacity " +
                        std::to_string(q.capacity()));
  }
}

}  // namespace

std::vector<double> synthesize_real(std::span<const double> a,
                                    const RadialQuadrature& quad) {
  const int n = static_cast<int>(a.size());
  require_capacity("synthesize", n, quad);
  const std::size_t m = quad.n_nodes();
  std::vector<double> grid(m, 0.0);
  if (quad.kind_ == QuadKind::kUniformSine) {
    std::vector<double> in(m, 0.0);
    std::copy(a.begin(), a.end(), in.begin());
    quad.dst_->apply(in.data(), grid.data());
    for (std::size_t j = 0; j < m; ++j) {
      grid[j] /= kSqrt2 * quad.nodes_[j];
    }
  } else {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += a[k] * eval_basis(k + 1, quad.nodes_[j]);
      grid[j] = acc;
    }
  }
  return grid;
}

std::vector<std::complex<double>> synthesize(const SpectralState& state,
                                             const RadialQuadrature& quad) {
  const int n = state.n_modes();
  require_capacity("synthesize", n, quad);
  std::vector<double> re(static_cast<std::size_t>(n)), im(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    re[k] = state.coeffs[k].real();
    im[k] = state.coeffs[k].imag();
  }
  const auto gre = synthesize_real(re, quad);
  const auto gim = synthesize_real(im, quad);
  std::vector<std::complex<double>> grid(quad.n_nodes());
  for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = {gre[j], gim[j]};
  return grid;
}

std::vector<double> analyze_real(std::span<const double> grid,
                                 const RadialQuadrature& quad, int n_modes) {
  if (grid.size() != quad.n_nodes()) {
    throw std::invalid_argument("analyze: grid length " +
                                std::to_string(grid.size()) +
                                " != node count " +
                                std::to_string(quad.n_nodes()));
  }
  if (n_modes < 0) throw std::invalid_argument("analyze: negative mode count");
  require_capacity("analyze", n_modes, quad);
  std::vector<double> coeffs(static_cast<std::size_t>(n_modes), 0.0);
  if (quad.kind_ == QuadKind::kUniformSine) {
    const std::size_t m = quad.n_nodes();
    std::vector<double> in(m), out(m);
    for (std::size_t j = 0; j < m; ++j) in[j] = quad.nodes_[j] * grid[j];
    quad.dst_->apply(in.data(), out.data());
    const double scale = 1.0 / (kSqrt2 * quad.grid_param_);
    for (int k = 0; k < n_modes; ++k) coeffs[k] = scale * out[k];
  } else {
    for (int k = 0; k < n_modes; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < quad.n_nodes(); ++j) {
        acc += quad.weights_[j] * grid[j] * eval_basis(k + 1, quad.nodes_[j]);
      }
      coeffs[k] = acc;
    }
  }
  return coeffs;
}

SpectralState analyze(std::span<const std::complex<double>> grid,
                      const RadialQuadrature& quad, int n_modes) {
  std::vector<double> re(grid.size()), im(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    re[j] = grid[j].real();
    im[j] = grid[j].imag();
  }
  const auto cre = analyze_real(re, quad, n_modes);
  const auto cim = analyze_real(im, quad, n_modes);
  SpectralState s = SpectralState::zero(n_modes);
  for (int k = 0; k < n_modes; ++k) s.coeffs[k] = {cre[k], cim[k]};
  return s;
}

// ---------------------------------------------------------------------------
// Coefficient functionals
// ---------------------------------------------------------------------------

std::complex<double> inner_product(const SpectralState& x,
                                   const SpectralState& y) {
  const std::size_t n = std::min(x.coeffs.size(), y.coeffs.size());
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) acc += x.coeffs[k] * std::conj(y.coeffs[k]);
  return acc;
}

double sobolev_norm(const SpectralState& x, double s) {
  double acc = 0.0;
  for (int k = 0; k < x.n_modes(); ++k) {
    acc += std::pow(kPi * (k + 1), 2.0 * s) * std::norm(x.coeffs[k]);
  }
  return std::sqrt(acc);
}

double sobolev_distance(const SpectralState& x, const SpectralState& y,
                        double s) {
  const int n = std::max(x.n_modes(), y.n_modes());
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const std::complex<double> cx = k < x.n_modes() ? x.coeffs[k] : 0.0;
    const std::complex<double> cy = k < y.n_modes() ? y.coeffs[k] : 0.0;
    acc += std::pow(kPi * (k + 1), 2.0 * s) * std::norm(cx - cy);
  }
  return std::sqrt(acc);
}

double lebesgue_norm(const SpectralState& x, double p,
                     const RadialQuadrature& quad) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("lebesgue_norm: p must be >= 1, got " +
                                std::to_string(p));
  }
  const auto grid = synthesize(x, quad);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    acc += quad.weights()[j] * std::pow(std::abs(grid[j]), p);
  }
  return std::pow(acc, 1.0 / p);
}

double real_lp_pow(const SpectralState& x, double p,
                   const RadialQuadrature& quad) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("real_lp_pow: p must be >= 1, got " +
                                std::to_string(p));
  }
  const int n = x.n_modes();
  std::vector<double> a(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) a[k] = x.coeffs[k].real();
  const auto grid = synthesize_real(a, quad);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    acc += quad.weights()[j] * std::pow(std::abs(grid[j]), p);
  }
  return acc;
}

SpectralState sqrt_laplacian_pow(const SpectralState& x, double gamma) {
  SpectralState y = x;
  for (int k = 0; k < y.n_modes(); ++k) {
    y.coeffs[k] *= std::pow(kPi * (k + 1), gamma);
  }
  return y;
}

SpectralState project(const SpectralState& x, int n_keep) {
  if (n_keep < 0) {
    throw std::invalid_argument("project: negative mode count");
  }
  SpectralState y = x;
  for (int k = n_keep; k < y.n_modes(); ++k) y.coeffs[k] = {0.0, 0.0};
  return y;
}

SpectralState real_part(const SpectralState& x) {
  SpectralState y = x;
  for (auto& c : y.coeffs) c = {c.real(), 0.0};
  return y;
}

SpectralState complexify(const WaveDataPair& pair) {
  if (pair.f1.size() != pair.f2.size()) {
    throw std::invalid_argument("complexify: component lengths differ (" +
                                std::to_string(pair.f1.size()) + " vs " +
                                std::to_string(pair.f2.size()) + ")");
  }
  SpectralState s = SpectralState::zero(static_cast<int>(pair.f1.size()));
  for (int k = 0; k < s.n_modes(); ++k) {
    s.coeffs[k] = {pair.f1[k], pair.f2[k] / (kPi * (k + 1))};
  }
  return s;
}

WaveDataPair decomplexify(const SpectralState& s) {
  WaveDataPair pair;
  pair.f1.resize(s.coeffs.size());
  pair.f2.resize(s.coeffs.size());
  for (int k = 0; k < s.n_modes(); ++k) {
    pair.f1[k] = s.coeffs[k].real();
    pair.f2[k] = s.coeffs[k].imag() * (kPi * (k + 1));
  }
  return pair;
}

}  // namespace ballwave
