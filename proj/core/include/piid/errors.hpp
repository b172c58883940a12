#pragma once

#include <stdexcept>
#include <string>

namespace piid {

// Margin has sigma == 0 (degenerate distribution).
class ZeroVarianceError : public std::runtime_error {
public:
    explicit ZeroVarianceError(const std::string& what) : std::runtime_error(what) {}
};

// Custom margin whose P(W in A) is not the reciprocal of the declared integer.
class NonIntegerReciprocalError : public std::runtime_error {
public:
    NonIntegerReciprocalError(double measured, int ell)
        : std::runtime_error("P(W in A) = " + std::to_string(measured) +
                             " is not 1/" + std::to_string(ell)),
          measured_(measured), ell_(ell) {}
    double measured() const noexcept { return measured_; }
    int ell() const noexcept { return ell_; }

private:
    double measured_;
    int ell_;
};

// pair_index called with i >= j.
class IndexOrderError : public std::invalid_argument {
public:
    explicit IndexOrderError(const std::string& what) : std::invalid_argument(what) {}
};

// Exhaustive enumeration request exceeds the ell^m bound.
class TooLargeError : public std::invalid_argument {
public:
    explicit TooLargeError(const std::string& what) : std::invalid_argument(what) {}
};

class EmptySampleError : public std::invalid_argument {
public:
    explicit EmptySampleError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace piid
