#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "koopgen/dictionary.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/sysid.hpp"

namespace koopgen {

nlohmann::json dictionary_to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const nlohmann::json& j);

/// Dictionary, row-major L, method, imag_norm, provenance and warnings.
nlohmann::json generator_to_json(const LearnedGenerator& gen);
LearnedGenerator generator_from_json(const nlohmann::json& j);

nlohmann::json identified_to_json(const IdentifiedSystem& sys);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string json_hash(const nlohmann::json& j);

}  // namespace koopgen
