#include "twinmigrate/errors.hpp"

#include <sstream>
#include <utility>

namespace twinmigrate {

namespace {
std::string format_price(std::size_t index, double price) {
  std::ostringstream os;
  os << "NonPositivePrice: price[" << index << "] = " << price << " must be > 0";
  return os.str();
}
}  // namespace

NonPositivePrice::NonPositivePrice(std::size_t index_, double price_)
    : Error(format_price(index_, price_)), index(index_), price(price_) {}

NotAtFollowerBestResponse::NotAtFollowerBestResponse(std::size_t msp_, std::size_t mrp_,
                                                     double residual_)
    : Error("NotAtFollowerBestResponse: demand[" + std::to_string(msp_) + "][" +
            std::to_string(mrp_) + "] is " + std::to_string(residual_) +
            " away from its best response"),
      msp(msp_),
      mrp(mrp_),
      residual(residual_) {}

NoConvergence::NoConvergence(const std::string& what, std::size_t iterations_, double residual_,
                             Eigen::MatrixXd last_demands_, Eigen::VectorXd last_prices_)
    : Error("NoConvergence: " + what + " after " + std::to_string(iterations_) +
            " iterations (residual " + std::to_string(residual_) + ")"),
      iterations(iterations_),
      residual(residual_),
      last_demands(std::move(last_demands_)),
      last_prices(std::move(last_prices_)) {}

SpecInvalid::SpecInvalid(std::string field_, const std::string& why)
    : Error("SpecInvalid: " + field_ + ": " + why), field(std::move(field_)) {}

ParseError::ParseError(std::size_t line_, std::size_t column_, const std::string& why)
    : Error("ParseError at line " + std::to_string(line_) + ", column " +
            std::to_string(column_) + ": " + why),
      line(line_),
      column(column_) {}

SchemaError::SchemaError(std::string field_, const std::string& why)
    : Error("SchemaError: " + field_ + ": " + why), field(std::move(field_)) {}

InvariantError::InvariantError(std::string field_, const std::string& why)
    : Error("InvariantError: " + field_ + ": " + why), field(std::move(field_)) {}

EpisodeFinished::EpisodeFinished() : Error("EpisodeFinished: episode is done; call reset") {}

}  // namespace twinmigrate
