#include "streason/errors.hpp"

namespace streason {

const char* err_kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::Syntax: return "SyntaxError";
    case ErrKind::Reference: return "ReferenceError";
    case ErrKind::Format: return "FormatError";
    case ErrKind::Config: return "ConfigError";
    case ErrKind::Io: return "IoError";
    case ErrKind::UnknownSensor: return "UnknownSensor";
    case ErrKind::WindowOutOfRange: return "WindowOutOfRange";
    case ErrKind::MisalignedInterval: return "MisalignedInterval";
    case ErrKind::InsufficientData: return "InsufficientData";
    case ErrKind::InvalidConstraint: return "InvalidConstraint";
    case ErrKind::TypeMismatch: return "TypeMismatch";
    case ErrKind::Step: return "StepError";
    case ErrKind::DuplicateModule: return "DuplicateModule";
    case ErrKind::Backend: return "BackendError";
    case ErrKind::EmptyCompletion: return "EmptyCompletion";
    case ErrKind::Judge: return "JudgeError";
    case ErrKind::UnparseableVerdict: return "UnparseableVerdict";
    case ErrKind::LengthMismatch: return "LengthMismatch";
    case ErrKind::TooManyPredictions: return "TooManyPredictions";
    case ErrKind::PoolExhausted: return "PoolExhausted";
    case ErrKind::MissingInputs: return "MissingInputs";
    case ErrKind::Unrenderable: return "UnrenderableValue";
  }
  return "Error";
}

Error syntax_error(int line, int column, const std::string& message) {
  Error e(ErrKind::Syntax,
          "line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + message);
  e.line = line;
  e.column = column;
  return e;
}

Error reference_error(int line, const std::string& var) {
  Error e(ErrKind::Reference,
          "line " + std::to_string(line) + ": variable " + var + " is not bound by any earlier command");
  e.line = line;
  return e;
}

Error step_error(int step_index, const std::string& module_name, const Error& cause) {
  Error e(ErrKind::Step,
          "step " + std::to_string(step_index) + " (" + module_name + "): " + cause.what());
  e.step_index = step_index;
  e.module_name = module_name;
  return e;
}

int exit_code_for(ErrKind k) {
  switch (k) {
    case ErrKind::Format:
    case ErrKind::Config:
    case ErrKind::Io:
    case ErrKind::UnknownSensor:
    case ErrKind::WindowOutOfRange:
    case ErrKind::MisalignedInterval:
      return 3;
    case ErrKind::Backend:
    case ErrKind::EmptyCompletion:
    case ErrKind::Judge:
    case ErrKind::UnparseableVerdict:
      return 4;
    default:
      return 5;
  }
}

}  // namespace streason
