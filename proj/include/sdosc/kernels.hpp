#pragma once

// Batch arithmetic kernels used by the post-processing modules.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at start-up from the CPU
// feature flags; tests pin either variant through KernelTable or ScopedIsa
// and compare them element-wise.
//
// Zero handling follows the scalar abs_pow convention: |0|^q is 0 for q > 0,
// 1 for q == 0 and +inf for q < 0.

#include <cstddef>
#include <span>
#include <string_view>

namespace sdosc::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct EnergyCoeffs {
  double kinetic_coef;   // (l+1)/(l+2)
  double kinetic_exp;    // l+2
  double potential_coef; // d/(beta+2)
  double potential_exp;  // beta+2
};

/// Coefficients of the (z, w) phase field:
///   dz = a |z|^ez |w|^ewz sgn(w)
///   dw = -a |w|^eww |z|^ez z - damping |w|^ewd sgn(w)
struct FieldCoeffs {
  double a;
  double damping;
  double ez;
  double ewz;
  double eww;
  double ewd;
};

struct LogLogMoments {
  std::size_t n = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
};

struct KernelTable {
  Isa isa;
  void (*abs_pow)(const double* x, std::size_t n, double q, double* out);
  void (*signed_pow)(const double* x, std::size_t n, double q, double* out);
  void (*energy)(const double* u, const double* du, std::size_t n, const EnergyCoeffs& k,
                 double* out);
  void (*phase_field)(const double* z, const double* w, std::size_t n, const FieldCoeffs& k,
                      double* dz, double* dw);
  LogLogMoments (*loglog_moments)(const double* t, const double* v, std::size_t n);
  double (*max_increase)(const double* x, std::size_t n);
};

/// Best variant supported by both this build and the running CPU.
Isa detected_isa();
bool isa_available(Isa isa);
Isa active_isa();
/// Throws std::invalid_argument if the variant is not available.
void set_active_isa(Isa isa);

const KernelTable& table(Isa isa);
const KernelTable& active();

class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// Span front-ends over the active variant. Output spans must match input size.

void abs_pow(std::span<const double> x, double q, std::span<double> out);
void signed_pow(std::span<const double> x, double q, std::span<double> out);
void energy(std::span<const double> u, std::span<const double> du, const EnergyCoeffs& k,
            std::span<double> out);
void phase_field(std::span<const double> z, std::span<const double> w, const FieldCoeffs& k,
                 std::span<double> dz, std::span<double> dw);
/// Sums of x = log t, y = log v and their products; all inputs must be > 0.
LogLogMoments loglog_moments(std::span<const double> t, std::span<const double> v);
/// max(0, max_k x[k+1] - x[k]).
double max_increase(std::span<const double> x);

}  // namespace sdosc::kernels
