#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srw {

enum class ErrorKind {
  // inference
  EvidenceContradiction,
  UnknownNode,
  TooLarge,
  InvalidNetwork,
  InvalidEvidence,
  // fragments
  SchemaViolation,
  DuplicateNode,
  UnknownParent,
  CycleInFragment,
  NoParents,
  WeightParentMismatch,
  BadProbability,
  // glue
  CycleIntroduced,
  TableNotGluable,
  PriorConflict,
  SpecKindMismatch,
  // elicitation / agents
  EmptyPattern,
  UnknownActionKind,
  // evaluation
  MissingLabel,
  // misc
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Domain error carrying a machine-readable kind. The message is the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string detail() const { return what(); }

 private:
  ErrorKind kind_;
};

}  // namespace srw
