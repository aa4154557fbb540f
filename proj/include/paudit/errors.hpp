#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace paudit {

/// Base of every error raised by the library. `kind()` is a stable short name
/// used in reports and CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Errors that carry a list of offending ids or violation messages.
class ListError : public Error {
public:
    ListError(std::string kind, const std::string& what, std::vector<std::string> items)
        : Error(std::move(kind), what), items_(std::move(items)) {}

    const std::vector<std::string>& items() const noexcept { return items_; }

private:
    std::vector<std::string> items_;
};

#define PAUDIT_DEFINE_ERROR(Name, Base)                                     \
    class Name : public Base {                                              \
    public:                                                                 \
        template <typename... Args>                                         \
        explicit Name(Args&&... args) : Base(#Name, std::forward<Args>(args)...) {} \
    };

// Data and configuration problems (CLI exit code 1).
PAUDIT_DEFINE_ERROR(ParseError, Error)
PAUDIT_DEFINE_ERROR(IntegrityError, ListError)
PAUDIT_DEFINE_ERROR(DuplicateError, Error)
PAUDIT_DEFINE_ERROR(ConfigError, Error)
PAUDIT_DEFINE_ERROR(JoinError, ListError)
PAUDIT_DEFINE_ERROR(CoverageError, Error)

// Numeric preconditions.
PAUDIT_DEFINE_ERROR(DimensionError, Error)
PAUDIT_DEFINE_ERROR(NonFiniteError, Error)
PAUDIT_DEFINE_ERROR(ZeroVectorError, Error)
PAUDIT_DEFINE_ERROR(MissingEmbeddingError, ListError)
PAUDIT_DEFINE_ERROR(NoDistractorsError, Error)
PAUDIT_DEFINE_ERROR(EmptySetError, Error)
PAUDIT_DEFINE_ERROR(EmptyRetrievalError, Error)
PAUDIT_DEFINE_ERROR(NoFailuresError, Error)
PAUDIT_DEFINE_ERROR(ZeroOracleError, Error)
PAUDIT_DEFINE_ERROR(DegenerateBoundsError, Error)
PAUDIT_DEFINE_ERROR(EmptyTextError, Error)

// Model service.
PAUDIT_DEFINE_ERROR(MissingMediaRefError, Error)
PAUDIT_DEFINE_ERROR(TransportError, Error)
PAUDIT_DEFINE_ERROR(SchemaError, Error)
PAUDIT_DEFINE_ERROR(TimeoutError, Error)

// Filesystem (CLI exit code 3).
PAUDIT_DEFINE_ERROR(IOError, Error)

#undef PAUDIT_DEFINE_ERROR

}  // namespace paudit
