#pragma once

#include <stdexcept>
#include <string>

namespace sentprobe {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct LexiconError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct GenerationError : Error { using Error::Error; };
struct RealizationError : Error { using Error::Error; };
struct InsufficientPoolError : Error { using Error::Error; };
struct AmbiguityError : Error { using Error::Error; };
struct OovError : Error { using Error::Error; };
struct TrainingError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct PipelineError : Error { using Error::Error; };

}  // namespace sentprobe
