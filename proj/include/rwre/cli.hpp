#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/law.hpp"

namespace rwre
{

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

struct Diagnostic
{
    std::string path;      //!< JSON pointer, e.g. "/law/d"
    std::string message;
    std::string severity;  //!< "error" or "flag"
};

struct Validation
{
    std::vector<Diagnostic> diagnostics;
    std::int64_t state_count = 0;
    double memory_bytes = 0;

    bool ok() const;  //!< no error-severity diagnostics
};

class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(std::vector<Diagnostic> diagnostics);
    std::vector<Diagnostic> const& diagnostics() const { return diagnostics_; }

  private:
    std::vector<Diagnostic> diagnostics_;
};

/*!
 * Fill defaults for every block the command reads.
 *
 * The result is the exact configuration stored in the archive. Throws
 * ConfigError for schema violations.
 */
Json normalize_config(Json const& config);

//! Schema checks plus admissibility pre-flight.
Validation validate(Json const& config);

//! Law from a {kind, d, params} block.
EnvironmentLaw law_from_json(Json const& block);

//! 16 hex digits of a hash of the normalized config.
std::string run_id(Json const& normalized);

//---------------------------------------------------------------------------//
// Execution
//---------------------------------------------------------------------------//

struct RunOptions
{
    std::optional<std::uint64_t> seed;  //!< overrides seeds.master
    std::optional<bool> deterministic;
    int workers = 1;
    std::filesystem::path out = "runs";
};

struct RunOutcome
{
    std::string run_id;
    std::filesystem::path archive;
    int exit_code = 0;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> errors;
};

/*!
 * Validate, dispatch and write the archive <out>/<run id>/ atomically.
 *
 * Exit codes: 0 success, 2 validation failure (no archive), 3 when some
 * sub-task recorded an error.
 */
RunOutcome run(Json const& config, RunOptions const& opts);

//! Apply --seed and --deterministic overrides to a raw config.
Json apply_overrides(Json config, RunOptions const& opts);

}  // namespace rwre
