#pragma once

#include <complex>
#include <concepts>
#include <type_traits>

namespace saf {

using cx = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Scalar field of a problem instance: double (real) or std::complex<double>.
template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, cx>;

enum class Field { real, complex };

template <Scalar T>
constexpr Field field_of() {
    return is_complex_v<T> ? Field::complex : Field::real;
}

inline double conj_of(double x) { return x; }
inline cx conj_of(const cx& x) { return std::conj(x); }

inline double abs2(double x) { return x * x; }
inline double abs2(const cx& x) { return std::norm(x); }

}  // namespace saf
