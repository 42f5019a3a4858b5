#pragma once

#include <stdexcept>
#include <string>

namespace ordermill {

// Input text could not be parsed or validated. line/col are 1-based;
// 0 means "not attributable to a position".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line = 0, int col = 0)
        : std::runtime_error(format(msg, line, col)), line_(line), col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    static std::string format(const std::string& msg, int line, int col) {
        if (line <= 0) return msg;
        std::string s = "line " + std::to_string(line);
        if (col > 0) s += ", col " + std::to_string(col);
        return s + ": " + msg;
    }
    int line_;
    int col_;
};

// A BDD build exceeded the configured node cap.
class NodeLimitError : public std::runtime_error {
public:
    explicit NodeLimitError(std::size_t cap)
        : std::runtime_error("node limit exceeded (cap " + std::to_string(cap) + ")") {}
};

// Evaluation kept failing after the configured number of retries.
class EvalResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A classifier file does not match the feature extractor's schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An order file does not name exactly the model's variables.
class OrderMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ordermill
