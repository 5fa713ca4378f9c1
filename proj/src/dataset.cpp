#include "circsim/dataset.hpp"

#include <cstdio>
#include <sstream>

#include "circsim/errors.hpp"

namespace circsim::seq {

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string dataset_csv(const SpectrumDataset& ds) {
  size_t n = ds.axis.size();
  if (ds.value.size() != n || ds.error.size() != n) {
    throw ConfigError("dataset columns have mismatched lengths");
  }
  bool has_axis2 = !ds.axis2_name.empty();
  if (has_axis2 && ds.axis2.size() != n) {
    throw ConfigError("dataset columns have mismatched lengths");
  }
  std::ostringstream out;
  out << ds.axis_name;
  if (has_axis2) out << "," << ds.axis2_name;
  out << "," << ds.observable_name << ",error\n";
  for (size_t i = 0; i < n; ++i) {
    out << format_g12(ds.axis[i]);
    if (has_axis2) out << "," << format_g12(ds.axis2[i]);
    out << "," << format_g12(ds.value[i]) << "," << format_g12(ds.error[i])
        << "\n";
  }
  return out.str();
}

nlohmann::ordered_json dataset_sidecar(const SpectrumDataset& ds) {
  nlohmann::ordered_json j;
  j["sequence_id"] = ds.sequence_id;
  j["axis"] = {{"name", ds.axis_name}, {"unit", ds.axis_unit}};
  if (!ds.axis2_name.empty()) j["axis2"] = {{"name", ds.axis2_name}};
  j["observable"] = ds.observable_name;
  j["points"] = ds.axis.size();
  j["metadata"] = ds.metadata;
  return j;
}

}  // namespace circsim::seq
