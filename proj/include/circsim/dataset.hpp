#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace circsim::seq {

// One scanned spectrum: an axis, an observable with per-point errors, and a
// metadata block describing how the points were produced. When the scanned
// parameter is a microwave source frequency, axis2 carries the effective
// (photon-number times source) frequency so both conventions are on file.
struct SpectrumDataset {
  std::string sequence_id;
  std::string axis_name;
  std::string axis_unit;
  std::vector<double> axis;
  std::string axis2_name;  // empty when unused
  std::vector<double> axis2;
  std::string observable_name;
  std::vector<double> value;
  std::vector<double> error;
  nlohmann::ordered_json metadata;
};

// %.12g rendering shared by every file writer so outputs are reproducible.
std::string format_g12(double v);

std::string dataset_csv(const SpectrumDataset& ds);

nlohmann::ordered_json dataset_sidecar(const SpectrumDataset& ds);

}  // namespace circsim::seq
