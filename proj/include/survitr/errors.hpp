#pragma once
#include <stdexcept>
#include <string>

namespace survitr {

// Input or dataset validation failure (bad CSV cell, schema mismatch, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure in a fitting routine (non-convergence, singular system).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace survitr
