#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seepline {

// Error categories, doubling as CLI exit codes: config=2, data=3, numeric=4.
enum class ErrorKind : int { config = 2, data = 3, numeric = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct OrderingError : Error {
    explicit OrderingError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct DegenerateChannelError : Error {
    explicit DegenerateChannelError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct DegenerateVarianceError : Error {
    explicit DegenerateVarianceError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct LevelError : Error {
    explicit LevelError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorKind::data, w) {}
};

struct NotFoundError : Error {
    explicit NotFoundError(const std::string& w) : Error(ErrorKind::data, w) {}
};

// Carries the indices of rows that could not be imputed.
struct UnimputableRowError : Error {
    UnimputableRowError(const std::string& w, std::vector<std::int64_t> rows)
        : Error(ErrorKind::data, w), rows(std::move(rows)) {}
    std::vector<std::int64_t> rows;
};

struct ZeroDenominatorError : Error {
    ZeroDenominatorError(const std::string& w, std::int64_t index)
        : Error(ErrorKind::data, w), index(index) {}
    std::int64_t index;
};

struct NumericFault : Error {
    explicit NumericFault(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

}  // namespace seepline
