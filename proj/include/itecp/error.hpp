#pragma once

#include <stdexcept>
#include <string>

namespace itecp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file or column layout.
struct SchemaError : Error {
  using Error::Error;
};

// A (individual, decision point) cell is missing from a rectangular panel.
struct IncompletePanelError : Error {
  IncompletePanelError(const std::string& id, int decision_point)
      : Error("incomplete panel at (" + id + "," + std::to_string(decision_point) + ")"),
        individual_id(id),
        decision_point(decision_point) {}
  std::string individual_id;
  int decision_point;
};

// Propensity outside the open interval (0,1).
struct PositivityError : Error {
  using Error::Error;
};

// Invalid experiment or simulation configuration; message names the field.
struct ConfigError : Error {
  using Error::Error;
};

// Every raw calibration weight underflowed to zero.
struct DegenerateWeightsError : Error {
  using Error::Error;
};

}  // namespace itecp
