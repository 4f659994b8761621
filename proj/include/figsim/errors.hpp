#pragma once

#include <stdexcept>
#include <string>

namespace figsim {

// Error classes map onto CLI exit codes: config errors -> 2, trace errors -> 3,
// internal legality violations -> 4.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error("ParseError: " + what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& field, const std::string& why)
      : std::runtime_error("ValidationError: " + field + ": " + why), field(field) {}
  std::string field;
};

struct OrderingError : std::runtime_error {
  explicit OrderingError(const std::string& what) : std::runtime_error("OrderingError: " + what) {}
};

struct AlignmentError : std::runtime_error {
  explicit AlignmentError(const std::string& what) : std::runtime_error("AlignmentError: " + what) {}
};

struct OutOfRange : std::runtime_error {
  explicit OutOfRange(const std::string& what) : std::runtime_error("OutOfRange: " + what) {}
};

// A command was issued that can_issue rejects. Signals a controller bug and
// aborts the run.
struct IllegalCommand : std::logic_error {
  explicit IllegalCommand(const std::string& what) : std::logic_error("IllegalCommand: " + what) {}
};

struct SlotOccupied : std::logic_error {
  explicit SlotOccupied(const std::string& what) : std::logic_error("SlotOccupied: " + what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error("IoError: " + what) {}
};

}  // namespace figsim
