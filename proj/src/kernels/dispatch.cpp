#include <atomic>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace sdosc::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(SDOSC_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{detected_isa()};
  return slot;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("kernel size mismatch in ") + what);
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
  static const bool avx2 = cpu_has_avx2_fma();
  return avx2;
}

Isa detected_isa() { return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("kernel variant not available: " + std::string(to_string(isa)));
  active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("kernel variant not available: " + std::string(to_string(isa)));
#if defined(SDOSC_BUILD_AVX2)
  if (isa == Isa::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& active() { return table(active_isa()); }

void abs_pow(std::span<const double> x, double q, std::span<double> out) {
  check_sizes(x.size(), out.size(), "abs_pow");
  active().abs_pow(x.data(), x.size(), q, out.data());
}

void signed_pow(std::span<const double> x, double q, std::span<double> out) {
  check_sizes(x.size(), out.size(), "signed_pow");
  active().signed_pow(x.data(), x.size(), q, out.data());
}

void energy(std::span<const double> u, std::span<const double> du, const EnergyCoeffs& k,
            std::span<double> out) {
  check_sizes(u.size(), du.size(), "energy");
  check_sizes(u.size(), out.size(), "energy");
  active().energy(u.data(), du.data(), u.size(), k, out.data());
}

void phase_field(std::span<const double> z, std::span<const double> w, const FieldCoeffs& k,
                 std::span<double> dz, std::span<double> dw) {
  check_sizes(z.size(), w.size(), "phase_field");
  check_sizes(z.size(), dz.size(), "phase_field");
  check_sizes(z.size(), dw.size(), "phase_field");
  active().phase_field(z.data(), w.data(), z.size(), k, dz.data(), dw.data());
}

LogLogMoments loglog_moments(std::span<const double> t, std::span<const double> v) {
  check_sizes(t.size(), v.size(), "loglog_moments");
  return active().loglog_moments(t.data(), v.data(), t.size());
}

double max_increase(std::span<const double> x) { return active().max_increase(x.data(), x.size()); }

}  // namespace sdosc::kernels
