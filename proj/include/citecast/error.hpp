#pragma once

#include <stdexcept>
#include <string>

namespace citecast {

/// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested year is absent from a journal history.
class MissingYearError : public Error {
public:
    MissingYearError(const std::string& journal_id, int year)
        : Error("journal '" + journal_id + "' has no record for year " + std::to_string(year)),
          year_(year) {}

    [[nodiscard]] int year() const noexcept { return year_; }

private:
    int year_;
};

/// CiteScore denominator is zero.
class UndefinedCiteScoreError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data is malformed or violates an invariant.
class DataError : public Error {
public:
    using Error::Error;
};

/// Parse failure in a line-oriented input file; line numbers are 1-based.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A series is too short for the requested predictor.
class InsufficientHistoryError : public Error {
public:
    using Error::Error;
};

/// Input layout does not match what a model or parameter block expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(int epoch)
        : Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    [[nodiscard]] int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// A metric has a zero denominator (all-zero targets for MAPE, constant targets for R²).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

}  // namespace citecast
