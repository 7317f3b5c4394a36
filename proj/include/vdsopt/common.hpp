#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vdsopt {

inline constexpr const char* version = "0.1.0";

using real_t = double;
using complex_t = std::complex<double>;
using rvec = std::vector<real_t>;
using cvec = std::vector<complex_t>;
using index_t = std::size_t;
using index_set = std::vector<index_t>;

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

// An iterative method hit its cap. Carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline bool is_power_of_two(std::size_t n) noexcept
{
    return n != 0 && (n & (n - 1)) == 0;
}

inline std::size_t ilog2(std::size_t n) noexcept
{
    std::size_t l = 0;
    while ((std::size_t{1} << (l + 1)) <= n) ++l;
    return l;
}

} // namespace vdsopt
