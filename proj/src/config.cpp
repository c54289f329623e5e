#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "rwre/cli.hpp"
#include "rwre/criterion.hpp"
#include "rwre/domain.hpp"
#include "rwre/green.hpp"
#include "rwre/rng.hpp"

namespace rwre
{
namespace
{

Json law_defaults()
{
    return Json{{"kind", "deterministic-drift"},
                {"d", 2},
                {"params", Json{{"lambda", 0.0},
                                {"amplitude", 0.0},
                                {"base", "uniform"},
                                {"atoms", Json::array()}}},
                {"seed", nullptr}};
}

Json caps_defaults()
{
    return Json{{"state_cap", 4'000'000}, {"solve_cap", 2'000'000}};
}

Json surrogate_defaults()
{
    return Json{{"enabled", true},      {"M", 3},           {"L", 2},
                {"W", 4},               {"H", 2},           {"h", 2},
                {"gamma1", 0.0},        {"gamma1_floor", 1e-3},
                {"n_env", 32},          {"n_walks", 2000},  {"hat_rho_stride", 1},
                {"p_stride", 0}};
}

Json criterion_defaults()
{
    return Json{{"r", 1},
                {"c1", 0.5},
                {"c2", 1.0},
                {"moment_samples", 1'000'000},
                {"surrogate", surrogate_defaults()}};
}

Json command_defaults(std::string const& command)
{
    if (command == "walk")
    {
        return Json{{"domain", "box:3"},
                    {"start", Json::array()},
                    {"n_env", 16},
                    {"n_walks", 1000},
                    {"step_cap", 0}};
    }
    if (command == "green")
    {
        return Json{{"L", 2},
                    {"W", 4},
                    {"field", "drift-e1"},
                    {"method", "exact"},
                    {"n_walks", 10000},
                    {"starts", Json::array()},
                    {"step_cap", 0},
                    {"hat_rho_M", 0}};
    }
    if (command == "criterion")
    {
        return criterion_defaults();
    }
    if (command == "concentration")
    {
        return Json{{"L", 2},
                    {"W", 4},
                    {"checks", Json::array({"bblm", "mean", "tail", "scaling"})},
                    {"n_env", 500},
                    {"q", Json::array({2.0, 4.0})},
                    {"inner_replicates", 8},
                    {"r", 2},
                    {"u", Json::array()},
                    {"c7", 1.0},
                    {"tail_n_env", 1000},
                    {"scaling_amplitudes", Json::array({0.005, 0.01, 0.02})},
                    {"scaling_n_env", 200}};
    }
    // sweep
    Json out = criterion_defaults();
    out["cells"] = Json::array();
    return out;
}

char const* type_name(Json const& j)
{
    if (j.is_null())
        return "null";
    if (j.is_boolean())
        return "boolean";
    if (j.is_number_integer())
        return "integer";
    if (j.is_number())
        return "number";
    if (j.is_string())
        return "string";
    if (j.is_array())
        return "array";
    return "object";
}

bool compatible(Json const& def, Json const& value, bool nullable)
{
    if (value.is_null())
        return nullable || def.is_null();
    if (def.is_null())
        return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    if (def.is_number_integer())
        return value.is_number_integer();
    if (def.is_number())
        return value.is_number();
    if (def.is_boolean())
        return value.is_boolean();
    if (def.is_string())
        return value.is_string();
    if (def.is_array())
        return value.is_array();
    return value.is_object();
}

// Overlay `user` onto `defaults`; unknown keys and type mismatches become
// diagnostics. Arrays are replaced wholesale.
Json merge(Json const& defaults, Json const& user, std::string const& path,
           std::vector<Diagnostic>& diags)
{
    Json out = defaults;
    if (!user.is_object())
    {
        diags.push_back({path.empty() ? "/" : path, "expected an object", "error"});
        return out;
    }
    for (auto const& [key, value] : user.items())
    {
        std::string const p = path + "/" + key;
        if (!defaults.contains(key))
        {
            diags.push_back({p, "unknown field", "error"});
            continue;
        }
        Json const& def = defaults[key];
        if (def.is_object() && value.is_object())
        {
            out[key] = merge(def, value, p, diags);
        }
        else if (compatible(def, value, false))
        {
            out[key] = value;
        }
        else
        {
            diags.push_back({p,
                             std::string("expected ") + (def.is_null() ? "unsigned integer or null" : type_name(def))
                                 + ", got " + type_name(value),
                             "error"});
        }
    }
    return out;
}

std::set<std::string> const& commands()
{
    static std::set<std::string> const names{"walk", "green", "criterion", "concentration",
                                             "sweep"};
    return names;
}

void require(bool ok, std::string path, std::string message, std::vector<Diagnostic>& diags)
{
    if (!ok)
        diags.push_back({std::move(path), std::move(message), "error"});
}

void check_int_at_least(Json const& block, std::string const& key, std::string const& path,
                        std::vector<Diagnostic>& diags, std::int64_t min = 1)
{
    require(block.at(key).get<std::int64_t>() >= min, path + "/" + key,
            "must be >= " + std::to_string(min), diags);
}

std::int64_t slab_states(int d, std::int64_t L, std::int64_t W)
{
    std::int64_t n = 2 * L;
    for (int i = 1; i < d; ++i)
        n *= W;
    return n;
}

void check_slab(Json const& block, int d, std::string const& path, std::int64_t cap,
                std::vector<Diagnostic>& diags, std::int64_t& states)
{
    auto const L = block.at("L").get<std::int64_t>();
    auto const W = block.at("W").get<std::int64_t>();
    require(L >= 1, path + "/L", "must be >= 1", diags);
    require(W >= 2 && W % 2 == 0, path + "/W", "must be even and >= 2", diags);
    if (L >= 1 && W >= 2)
    {
        states = slab_states(d, L, W);
        if (states > cap)
        {
            diags.push_back({path,
                             std::to_string(states) + " slab states exceed /caps/state_cap = "
                                 + std::to_string(cap) + "; raise it to at least "
                                 + std::to_string(states),
                             "error"});
        }
    }
}

void schedule_flags(EnvironmentLaw const& law, Json const& block, std::string const& path,
                    std::vector<Diagnostic>& diags)
{
    int const r = block.at("r").get<int>();
    double const eps = epsilon_of(law);
    if (!(eps > 0 && eps < 1))
    {
        diags.push_back({path, "schedule undefined: eps must lie in (0, 1)", "flag"});
        return;
    }
    double const sigma = sigma_of(law, r, 100'000, 1).value;
    if (!(sigma > 0))
    {
        diags.push_back({path, "schedule undefined: sigma_2r = 0", "flag"});
        return;
    }
    ScheduleConstants c;
    c.c1 = block.at("c1").get<double>();
    c.c2 = block.at("c2").get<double>();
    auto const s = make_schedule(law.dimension(), r, eps, sigma, c);
    if (!s.eps_L_small)
        diags.push_back({path + "/c1", "flag eps L < 3/4 violated", "flag"});
    if (!s.h_fits)
        diags.push_back({path, "flag 2h <= H violated", "flag"});
    if (!s.H_fits)
        diags.push_back({path, "flag H <= M^3/32 violated", "flag"});
    if (!s.not_too_small)
        diags.push_back({path, "flag sigma_2r > eps^2 violated", "flag"});
}

Json normalize_impl(Json const& config, std::vector<Diagnostic>& diags)
{
    if (!config.is_object())
    {
        diags.push_back({"/", "config must be a JSON object", "error"});
        return Json::object();
    }
    std::string command;
    if (!config.contains("command") || !config["command"].is_string()
        || !commands().count(config["command"].get<std::string>()))
    {
        diags.push_back({"/command",
                         "must be one of walk, green, criterion, concentration, sweep",
                         "error"});
        return Json::object();
    }
    command = config["command"].get<std::string>();

    Json defaults{{"schema_version", kSchemaVersion},
                  {"command", command},
                  {"deterministic", true},
                  {"seeds", Json{{"master", 0}}},
                  {"law", law_defaults()},
                  {"caps", caps_defaults()},
                  {command, command_defaults(command)}};
    Json out = merge(defaults, config, "", diags);
    if (out["schema_version"] != kSchemaVersion)
    {
        diags.push_back({"/schema_version",
                         "unsupported version; expected " + std::to_string(kSchemaVersion),
                         "error"});
    }
    auto const& master = out["seeds"]["master"];
    if (!master.is_number_unsigned() && !(master.is_number_integer() && master.get<std::int64_t>() >= 0))
        diags.push_back({"/seeds/master", "must be an unsigned integer", "error"});
    return out;
}

}  // namespace

//---------------------------------------------------------------------------//

bool Validation::ok() const
{
    return std::none_of(diagnostics.begin(), diagnostics.end(),
                        [](Diagnostic const& d) { return d.severity == "error"; });
}

namespace
{
std::string join_diagnostics(std::vector<Diagnostic> const& diags)
{
    std::string out = "invalid config";
    for (auto const& d : diags)
        out += "\n  " + d.path + ": " + d.message;
    return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

EnvironmentLaw law_from_json(Json const& block)
{
    auto const kind = law_kind_from_string(block.at("kind").get<std::string>());
    int const d = block.at("d").get<int>();
    Json const& p = block.at("params");
    LawParams params;
    params.lambda = p.value("lambda", 0.0);
    params.amplitude = p.value("amplitude", 0.0);
    std::string const base = p.value("base", std::string("uniform"));
    if (base == "uniform")
        params.base = IsotropicBase::uniform;
    else if (base == "rademacher")
        params.base = IsotropicBase::rademacher;
    else
        throw std::invalid_argument("unknown isotropic base '" + base + "'");
    if (p.contains("atoms"))
    {
        for (auto const& atom : p.at("atoms"))
        {
            LawAtom a;
            a.weight = atom.at("weight").get<double>();
            auto const probs = atom.at("p").get<std::vector<double>>();
            if (static_cast<int>(probs.size()) != 2 * d)
                throw std::invalid_argument("atom vector must have 2d entries");
            a.vector.dim = d;
            std::copy(probs.begin(), probs.end(), a.vector.p.begin());
            params.atoms.push_back(a);
        }
    }
    return make_law(kind, d, params);
}

Json normalize_config(Json const& config)
{
    std::vector<Diagnostic> diags;
    Json out = normalize_impl(config, diags);
    if (!diags.empty())
        throw ConfigError(std::move(diags));
    return out;
}

Validation validate(Json const& config)
{
    Validation v;
    auto& diags = v.diagnostics;
    Json const c = normalize_impl(config, diags);
    if (!diags.empty())
        return v;

    std::string const command = c["command"].get<std::string>();
    std::string const bp = "/" + command;
    Json const& block = c[command];
    std::int64_t const cap = c["caps"]["state_cap"].get<std::int64_t>();
    require(cap >= 1, "/caps/state_cap", "must be >= 1", diags);
    require(c["caps"]["solve_cap"].get<std::int64_t>() >= 1, "/caps/solve_cap", "must be >= 1",
            diags);

    int const d = c["law"]["d"].get<int>();
    std::optional<EnvironmentLaw> law;
    if (d < 2 || d > kMaxDim)
    {
        diags.push_back({"/law/d", "must be an integer in [2, 6]", "error"});
        return v;
    }
    try
    {
        law = law_from_json(c["law"]);
    }
    catch (std::exception const& e)
    {
        diags.push_back({"/law", e.what(), "error"});
    }

    if (command == "walk")
    {
        check_int_at_least(block, "n_env", bp, diags);
        check_int_at_least(block, "n_walks", bp, diags);
        check_int_at_least(block, "step_cap", bp, diags, 0);
        try
        {
            auto const domain = parse_domain(d, block["domain"].get<std::string>());
            v.state_count = domain.size();
            if (v.state_count > cap)
            {
                diags.push_back({bp + "/domain",
                                 std::to_string(v.state_count) + " states exceed /caps/state_cap = "
                                     + std::to_string(cap) + "; raise it to at least "
                                     + std::to_string(v.state_count),
                                 "error"});
            }
            auto const& start = block["start"];
            if (!start.empty())
            {
                if (static_cast<int>(start.size()) != d
                    || !std::all_of(start.begin(), start.end(),
                                    [](Json const& x) { return x.is_number_integer(); }))
                {
                    diags.push_back({bp + "/start", "must list d integers", "error"});
                }
                else
                {
                    Site x{};
                    for (int i = 0; i < d; ++i)
                        x[i] = start[i].get<int>();
                    require(domain.contains(x), bp + "/start", "start lies outside the domain",
                            diags);
                }
            }
        }
        catch (std::exception const& e)
        {
            diags.push_back({bp + "/domain", e.what(), "error"});
        }
    }
    else if (command == "green")
    {
        check_slab(block, d, bp, cap, diags, v.state_count);
        check_int_at_least(block, "n_walks", bp, diags);
        check_int_at_least(block, "step_cap", bp, diags, 0);
        check_int_at_least(block, "hat_rho_M", bp, diags, 0);
        std::string const method = block["method"].get<std::string>();
        require(method == "exact" || method == "mc", bp + "/method", "must be exact or mc", diags);
        try
        {
            FieldSpec::parse(block["field"].get<std::string>(), d);
        }
        catch (std::exception const& e)
        {
            diags.push_back({bp + "/field", e.what(), "error"});
        }
        for (std::size_t i = 0; i < block["starts"].size(); ++i)
        {
            auto const& s = block["starts"][i];
            require(s.is_array() && static_cast<int>(s.size()) == d,
                    bp + "/starts/" + std::to_string(i), "must list d integers", diags);
        }
    }
    else if (command == "criterion" || command == "sweep")
    {
        check_int_at_least(block, "r", bp, diags);
        require(block["c1"].get<double>() > 0, bp + "/c1", "must be > 0", diags);
        require(block["c2"].get<double>() > 0, bp + "/c2", "must be > 0", diags);
        check_int_at_least(block, "moment_samples", bp, diags);
        Json const& s = block["surrogate"];
        std::string const sp = bp + "/surrogate";
        for (char const* key : {"M", "L", "H", "h", "n_env", "n_walks", "hat_rho_stride"})
            check_int_at_least(s, key, sp, diags);
        check_int_at_least(s, "p_stride", sp, diags, 0);
        require(s["gamma1"].get<double>() >= 0, sp + "/gamma1", "must be >= 0", diags);
        require(s["gamma1_floor"].get<double>() > 0, sp + "/gamma1_floor", "must be > 0", diags);
        if (s["enabled"].get<bool>())
        {
            std::int64_t slab_count = 0;
            check_slab(s, d, sp, cap, diags, slab_count);
            auto const M = s["M"].get<int>();
            if (M >= 1)
            {
                auto const box = LatticeDomain::box(d, M).size();
                v.state_count = std::max(slab_count, box);
                if (box > cap)
                {
                    diags.push_back({sp + "/M",
                                     std::to_string(box) + " box states exceed /caps/state_cap = "
                                         + std::to_string(cap) + "; raise it to at least "
                                         + std::to_string(box),
                                     "error"});
                }
            }
        }
        if (command == "sweep")
        {
            auto const& cells = block["cells"];
            require(!cells.empty(), bp + "/cells", "must list at least one cell", diags);
            for (std::size_t i = 0; i < cells.size(); ++i)
            {
                std::string const cp = bp + "/cells/" + std::to_string(i);
                if (!cells[i].is_object())
                {
                    diags.push_back({cp, "expected an object", "error"});
                    continue;
                }
                for (auto const& [key, value] : cells[i].items())
                {
                    bool const known = key == "epsilon" || key == "lambda" || key == "amplitude"
                                       || key == "r";
                    require(known, cp + "/" + key, "unknown field", diags);
                    require(!known || value.is_number(), cp + "/" + key, "expected number", diags);
                }
            }
        }
        else if (law && diags.empty())
        {
            try
            {
                schedule_flags(*law, block, bp, diags);
            }
            catch (std::exception const& e)
            {
                diags.push_back({bp, e.what(), "flag"});
            }
        }
    }
    else if (command == "concentration")
    {
        check_slab(block, d, bp, cap, diags, v.state_count);
        check_int_at_least(block, "n_env", bp, diags, 2);
        check_int_at_least(block, "inner_replicates", bp, diags);
        check_int_at_least(block, "scaling_n_env", bp, diags, 2);
        int const r = block["r"].get<int>();
        require(r >= 2 && r % 2 == 0, bp + "/r", "must be even and >= 2", diags);
        for (auto const& q : block["q"])
            require(q.is_number() && q.get<double>() >= 2, bp + "/q", "entries must be >= 2", diags);
        for (auto const& u : block["u"])
            require(u.is_number() && u.get<double>() >= 0, bp + "/u", "entries must be >= 0", diags);
        std::set<std::string> checks;
        for (auto const& ch : block["checks"])
        {
            std::string const name = ch.is_string() ? ch.get<std::string>() : "";
            require(name == "bblm" || name == "mean" || name == "tail" || name == "scaling",
                    bp + "/checks", "entries must be bblm, mean, tail or scaling", diags);
            checks.insert(name);
        }
        if (checks.count("tail"))
            check_int_at_least(block, "tail_n_env", bp, diags, 1000);
        if (checks.count("bblm") && v.state_count > 0)
        {
            std::int64_t const dense = 3000;
            std::int64_t const solves = v.state_count > dense ? v.state_count + 2 : 1;
            std::int64_t const solve_cap = c["caps"]["solve_cap"].get<std::int64_t>();
            if (solves > solve_cap)
            {
                diags.push_back({"/caps/solve_cap",
                                 std::to_string(solves) + " solves per environment exceed the cap",
                                 "error"});
            }
        }
    }

    // per state: 2d probabilities, cumulative weights and neighbor codes,
    // plus about ten solver vectors
    v.memory_bytes = static_cast<double>(v.state_count) * (2.0 * d * 24.0 + 80.0);
    return v;
}

std::string run_id(Json const& normalized)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(normalized.dump())));
    return buf;
}

Json apply_overrides(Json config, RunOptions const& opts)
{
    if (!config.is_object())
        return config;
    if (opts.seed)
        config["seeds"]["master"] = *opts.seed;
    if (opts.deterministic)
        config["deterministic"] = *opts.deterministic;
    return config;
}

}  // namespace rwre
