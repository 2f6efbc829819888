#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volq {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An argument or configuration violates a documented precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Implied-vol inversion has no solution at the quoted price.
class NoVolSolution : public Error {
public:
    enum class Reason { below_intrinsic, above_upper_bound };

    NoVolSolution(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

class DuplicateStrike : public Error {
public:
    using Error::Error;
};

class UnparseableRow : public Error {
public:
    UnparseableRow(std::size_t line, const std::string& what) : Error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A normalizing transformation decreased somewhere on the scan interval.
// Inversion (and therefore pricing) refuses; diagnosis reports it as data.
class NotMonotone : public Error {
public:
    NotMonotone(double k_lo, double k_hi, const std::string& what)
        : Error(what), k_lo_(k_lo), k_hi_(k_hi) {}
    double k_lo() const { return k_lo_; }
    double k_hi() const { return k_hi_; }

private:
    double k_lo_;
    double k_hi_;
};

// Target value lies outside the attainable range of the transformation.
class NoBracket : public Error {
public:
    using Error::Error;
};

class MissingDerivative : public Error {
public:
    using Error::Error;
};

} // namespace volq
