#pragma once

// JSON model files.
//   linear: {"kind": "linear", "L": int, "taps": [[re, im], ...]}
//   poly:   {"kind": "poly", "P": int, "L": int, "coeffs": [{"p", "q", "l", "re", "im"}, ...]}
//   nn:     {"kind": "nn", "L", "N_l", "N_h", "layers": [{"n_in", "n_out", "activation",
//            "w": [...], "b": [...]}], "lin": {linear}, "x_mean", "x_var",
//            "denorm_shift": [re, im], "denorm_mean"}
// Network parameters are written as "%.17g" decimal strings so that float64
// values survive the round trip exactly. An optional "config_hash" field
// records the configuration that produced the file.

#include <sic/linear.hpp>
#include <sic/nn.hpp>
#include <sic/poly.hpp>

#include <json.hpp>

#include <string>

namespace sic {

nlohmann::ordered_json to_json(const LinModel& m);
nlohmann::ordered_json to_json(const PolyModel& m);
nlohmann::ordered_json to_json(const NNModel& m);

LinModel lin_from_json(const nlohmann::ordered_json& j);
PolyModel poly_from_json(const nlohmann::ordered_json& j);
NNModel nn_from_json(const nlohmann::ordered_json& j);

/// Reads a JSON file; parse errors become DataError with the position.
nlohmann::ordered_json read_json_file(const std::string& path);
/// Writes `text` verbatim (binary mode, so output bytes match across platforms).
void write_text_file(const std::string& path, const std::string& text);

/// Lossless decimal representation of a double.
std::string exact_decimal(double v);

} // namespace sic
