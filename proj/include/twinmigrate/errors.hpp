#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace twinmigrate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositivePrice : public Error {
 public:
  NonPositivePrice(std::size_t index, double price);
  std::size_t index;
  double price;
};

class NotAtFollowerBestResponse : public Error {
 public:
  NotAtFollowerBestResponse(std::size_t msp, std::size_t mrp, double residual);
  std::size_t msp;
  std::size_t mrp;
  double residual;
};

// Iterative solver hit its cap. Carries whatever state the solver had at the
// time so callers can inspect or resume.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::size_t iterations, double residual,
                Eigen::MatrixXd last_demands = {}, Eigen::VectorXd last_prices = {});
  std::size_t iterations;
  double residual;
  Eigen::MatrixXd last_demands;
  Eigen::VectorXd last_prices;
};

// Invalid sampling specification; `field` names the offending ScenarioSpec field.
class SpecInvalid : public Error {
 public:
  SpecInvalid(std::string field, const std::string& why);
  std::string field;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& why);
  std::size_t line;
  std::size_t column;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& why);
  std::string field;
};

class InvariantError : public Error {
 public:
  InvariantError(std::string field, const std::string& why);
  std::string field;
};

class EpisodeFinished : public Error {
 public:
  EpisodeFinished();
};

}  // namespace twinmigrate
