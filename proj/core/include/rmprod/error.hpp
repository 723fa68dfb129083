#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rmprod {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched or out-of-range matrix dimension.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values where finite ones are required (NaN/inf entries,
/// NaN appearing mid-product).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid argument to a mathematical operation (zero polynomial, bad
/// probability, exact path requested for non-exact input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An enumeration would visit more points than the configured budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::string what, std::uint64_t required, std::uint64_t budget)
        : Error(std::move(what) + " (needs " + std::to_string(required) +
                ", budget " + std::to_string(budget) + ")"),
          required_(required), budget_(budget) {}

    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t required_;
    std::uint64_t budget_;
};

} // namespace rmprod
