#pragma once

#include <stdexcept>
#include <string>

namespace refinder {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NormalizationError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct MetricError : Error { using Error::Error; };
struct IngestError : Error { using Error::Error; };
struct EmptyIndexError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct FeedbackError : Error { using Error::Error; };
struct ConditioningError : Error { using Error::Error; };
struct NotFoundError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

}  // namespace refinder
