// errors.hpp -- exception types shared across the library.
#ifndef TREEGEN_ERRORS_HPP
#define TREEGEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace treegen {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Grammar file syntax or validation problem. line/col are 1-based; 0 = unknown.
class GrammarError : public Error {
public:
    GrammarError(const std::string& msg, int line = 0, int col = 0)
        : Error(format(msg, line, col)), line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    static std::string format(const std::string& msg, int line, int col) {
        if (line <= 0) return msg;
        std::string s = "line " + std::to_string(line);
        if (col > 0) s += ":" + std::to_string(col);
        return s + ": " + msg;
    }
    int line_;
    int col_;
};

// Illegal action during a derivation replay or decode step.
class DerivationError : public Error {
public:
    DerivationError(const std::string& msg, int timestep)
        : Error("timestep " + std::to_string(timestep) + ": " + msg),
          timestep_(timestep) {}
    int timestep() const { return timestep_; }

private:
    int timestep_;
};

// Surface-code parse failure; position is the furthest token index reached.
class CodeParseError : public Error {
public:
    CodeParseError(const std::string& msg, int position)
        : Error("position " + std::to_string(position) + ": " + msg),
          position_(position) {}
    int position() const { return position_; }

private:
    int position_;
};

// AST does not conform to the grammar.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Operation called in the wrong state (e.g. double normalization).
class StateError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Corpus / index file problems.
class DataError : public Error {
public:
    using Error::Error;
};

// Beam search exhausted max_steps without completing any hypothesis.
class DecodeTimeout : public Error {
public:
    DecodeTimeout(const std::string& msg, std::string partials)
        : Error(msg), partials_(std::move(partials)) {}
    // Human-readable summary of the best partial hypotheses.
    const std::string& partials() const { return partials_; }

private:
    std::string partials_;
};

}  // namespace treegen

#endif
