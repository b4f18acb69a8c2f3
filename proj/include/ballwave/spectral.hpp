#pragma once

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace ballwave {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

// Thrown when a quadrature grid cannot support the requested mode count.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Eigenvalue z_n = pi n of sqrt(-Laplace) on the radial Dirichlet sector
// of the unit ball; n >= 1.
double eigenvalue(int n);

// Radial eigenfunction e_n(r) = sqrt(2) sin(pi n r) / r, orthonormal under
// <f,g> = int_0^1 f(r) conj(g(r)) r^2 dr. Requires r in (0,1]; below
// r = 1e-8 the removable singularity is evaluated through sin(x)/x.
double eval_basis(int n, double r);

// Truncated state u = sum_{n=1}^{N} c_n e_n. Slot k stores mode n = k + 1.
struct SpectralState {
  std::vector<std::complex<double>> coeffs;

  int n_modes() const { return static_cast<int>(coeffs.size()); }
  static SpectralState zero(int n_modes);
  bool finite() const;

  bool operator==(const SpectralState&) const = default;
};

// Real first-order data (w, w_t) as paired coefficient lists.
struct WaveDataPair {
  std::vector<double> f1;  // position coefficients
  std::vector<double> f2;  // velocity coefficients
};

enum class QuadKind { kUniformSine, kGaussLegendre };

class SineTransform;  // FFTW-backed DST-I, defined in spectral.cpp

// Nodes and weights for int_0^1 f(r) r^2 dr together with the machinery
// for moving between coefficients and grid samples.
//
// The default grid is the uniform sine grid r_j = j/M (j = 1..M-1): with
// weights r_j^2 / M it reproduces <e_n, e_m> = delta_{nm} exactly for
// n, m < M and admits a fast sine-transform path. capacity() = M/8 is the
// certified mode count; the eightfold oversampling keeps the quadrature of
// low-order power nonlinearities well below the round-trip tolerances.
// Gauss-Legendre grids are provided as an independent cross-check.
class RadialQuadrature {
 public:
  static RadialQuadrature uniform_sine(int grid_points);   // M, nodes j/M
  static RadialQuadrature gauss_legendre(int n_points);

  QuadKind kind() const { return kind_; }
  int capacity() const { return capacity_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  // int_0^1 f(r) r^2 dr from grid samples of f.
  double integrate(std::span<const double> f) const;

 private:
  RadialQuadrature() = default;

  QuadKind kind_ = QuadKind::kUniformSine;
  int grid_param_ = 0;
  int capacity_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::shared_ptr<const SineTransform> dst_;  // uniform-sine fast path

  friend std::vector<std::complex<double>> synthesize(
      const SpectralState&, const RadialQuadrature&);
  friend std::vector<double> synthesize_real(std::span<const double>,
                                             const RadialQuadrature&);
  friend SpectralState analyze(std::span<const std::complex<double>>,
                               const RadialQuadrature&, int);
  friend std::vector<double> analyze_real(std::span<const double>,
                                          const RadialQuadrature&, int);
};

// Grid samples u(r_j). Requires state.n_modes() <= quad.capacity().
std::vector<std::complex<double>> synthesize(const SpectralState&,
                                             const RadialQuadrature&);

// Real synthesis v(r_j) = sum a_n e_n(r_j) for real coefficients a.
std::vector<double> synthesize_real(std::span<const double> a,
                                    const RadialQuadrature&);

// Quadrature pairing c_n = <u, e_n>, n = 1..n_modes. Exact round-trip of
// synthesize for band-limited input within capacity.
SpectralState analyze(std::span<const std::complex<double>> grid,
                      const RadialQuadrature&, int n_modes);

std::vector<double> analyze_real(std::span<const double> grid,
                                 const RadialQuadrature&, int n_modes);

// Coefficient pairing <x, y> = sum c_n(x) conj(c_n(y)); missing high modes
// of the shorter state count as zero.
std::complex<double> inner_product(const SpectralState&, const SpectralState&);

// || (sqrt(-Laplace))^s u ||_{L^2} = sqrt( sum z_n^{2s} |c_n|^2 ).
double sobolev_norm(const SpectralState&, double s);
double sobolev_distance(const SpectralState&, const SpectralState&, double s);

// Grid-quadrature L^p norm of |u|; p >= 1.
double lebesgue_norm(const SpectralState&, double p, const RadialQuadrature&);

// ||Re u||_{L^p}^p without the final root; shared by weights and energies.
double real_lp_pow(const SpectralState&, double p, const RadialQuadrature&);

// Diagonal spectral multiplier c_n -> z_n^gamma c_n.
SpectralState sqrt_laplacian_pow(const SpectralState&, double gamma);

// Zeroes modes above n_keep; storage length is unchanged.
SpectralState project(const SpectralState&, int n_keep);

// State with coefficients Re c_n (the position component as a state).
SpectralState real_part(const SpectralState&);

// First-order reduction u = f1 + i (sqrt(-Laplace))^{-1} f2, mode by mode:
// c_n = f1_n + i f2_n / z_n, and back.
SpectralState complexify(const WaveDataPair&);
WaveDataPair decomplexify(const SpectralState&);

}  // namespace ballwave
