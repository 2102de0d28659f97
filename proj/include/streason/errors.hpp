#pragma once

#include <stdexcept>
#include <string>

namespace streason {

enum class ErrKind {
  Syntax,             // malformed program text
  Reference,          // dangling variable reference
  Format,             // malformed config / pool / instance file
  Config,             // invalid synthesis or run configuration
  Io,                 // file not readable/writable
  UnknownSensor,
  WindowOutOfRange,
  MisalignedInterval,
  InsufficientData,
  InvalidConstraint,
  TypeMismatch,
  Step,               // wraps a module failure with step context
  DuplicateModule,
  Backend,
  EmptyCompletion,
  Judge,
  UnparseableVerdict,
  LengthMismatch,
  TooManyPredictions,
  PoolExhausted,
  MissingInputs,
  Unrenderable,
};

const char* err_kind_name(ErrKind k);

class Error : public std::runtime_error {
public:
  Error(ErrKind kind, std::string message)
      : std::runtime_error(std::string(err_kind_name(kind)) + ": " + message),
        kind(kind) {}

  ErrKind kind;
  int line = -1;      // 1-based, when the error is tied to program text
  int column = -1;
  int step_index = -1;  // 1-based, set by the interpreter on StepError
  std::string module_name;
};

Error syntax_error(int line, int column, const std::string& message);
Error reference_error(int line, const std::string& var);
Error step_error(int step_index, const std::string& module_name, const Error& cause);

// Exit-code families for the CLI: 2 usage, 3 data, 4 backend, 5 execution.
int exit_code_for(ErrKind k);

}  // namespace streason
