#pragma once

#include <string>

#include <json.hpp>

#include "mfglq/model.hpp"

namespace mfglq {

// Matrices are row-major nested arrays; a bare number is read as 1x1.
// A schedule is either one constant value or exactly M+1 samples.
GameConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const GameConfig& cfg);

GameConfig load_config(const std::string& path);
void save_config(const GameConfig& cfg, const std::string& path);

nlohmann::json matrix_to_json(const Mat& m);
nlohmann::json vector_to_json(const Vec& v);

}  // namespace mfglq
