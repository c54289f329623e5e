#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rwre/cli.hpp"
#include "rwre/concentration.hpp"
#include "rwre/criterion.hpp"
#include "rwre/domain.hpp"
#include "rwre/environment.hpp"
#include "rwre/green.hpp"
#include "rwre/walk.hpp"

namespace fs = std::filesystem;

namespace rwre
{
namespace
{

//---------------------------------------------------------------------------//
// Formatting
//---------------------------------------------------------------------------//

std::string fmt(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Non-finite doubles are written as strings so the JSON stays valid.
Json num(double x)
{
    if (std::isfinite(x))
        return x;
    return fmt(x);
}

Json est(Estimate const& e)
{
    return Json{{"value", num(e.value)}, {"std_error", num(e.std_error)}};
}

Json est(MCEstimate const& e)
{
    return Json{{"mean", num(e.mean)},
                {"std_error", num(e.std_error)},
                {"n", e.n},
                {"censored_fraction", num(e.censored_fraction)}};
}

Json site_json(Site const& x, int d)
{
    Json out = Json::array();
    for (int i = 0; i < d; ++i)
        out.push_back(x[i]);
    return out;
}

class Csv
{
  public:
    explicit Csv(std::vector<std::string> header) : width_(header.size())
    {
        row(header);
    }

    void row(std::vector<std::string> const& cells)
    {
        if (cells.size() != width_)
            throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

  private:
    std::size_t width_;
    std::ostringstream out_;
};

//---------------------------------------------------------------------------//
// Run context
//---------------------------------------------------------------------------//

struct Archive
{
    std::map<std::string, std::string> files;  // name -> content
    std::vector<std::string> warnings;
    std::map<std::string, std::string> errors;
};

struct Context
{
    Json const& config;
    EnvironmentLaw law;
    int workers;
    std::uint64_t master;
    std::uint64_t env_seed;
    std::uint64_t walk_seed;
    std::int64_t state_cap;
    std::int64_t solve_cap;
};

Json seed_manifest(Context const& ctx)
{
    return Json{{"master", ctx.master}, {"env", ctx.env_seed}, {"walk", ctx.walk_seed}};
}

Json law_json(EnvironmentLaw const& law)
{
    return Json{{"id", law.id()},
                {"kind", to_string(law.kind())},
                {"d", law.dimension()},
                {"epsilon", num(law.epsilon())},
                {"lambda", num(law.lambda())}};
}

Json verdict_json(Verdict const& v)
{
    return Json{{"inequality", v.inequality},
                {"lhs", num(v.lhs)},
                {"rhs", num(v.rhs)},
                {"status", to_string(v.status)},
                {"note", v.note}};
}

//---------------------------------------------------------------------------//
// walk
//---------------------------------------------------------------------------//

void run_walk(Context const& ctx, Archive& ar, Json& report)
{
    Json const& b = ctx.config["walk"];
    int const d = ctx.law.dimension();
    auto const domain = parse_domain(d, b["domain"].get<std::string>());
    Site start{};
    for (std::size_t i = 0; i < b["start"].size(); ++i)
        start[i] = b["start"][i].get<int>();
    WalkOptions wo;
    wo.step_cap = b["step_cap"].get<std::int64_t>();
    wo.workers = ctx.workers;
    auto const e = estimate_exit_probs(ctx.law, domain, start, b["n_env"].get<std::int64_t>(),
                                       b["n_walks"].get<std::int64_t>(),
                                       SeedPair{ctx.env_seed, ctx.walk_seed}, wo);

    report["domain"] = domain.describe();
    report["start"] = site_json(start, d);
    report["step_cap"] = e.step_cap;
    report["n_env"] = e.n_env;
    report["n_walks"] = e.n_walks;
    report["not_front"] = est(e.not_front);
    report["front"] = est(e.front);
    report["back"] = est(e.back);
    report["front_minus_back"] = est(e.front_minus_back);
    report["counts"] = Json{{"front", e.counts.front},
                            {"back", e.counts.back},
                            {"side", e.counts.side},
                            {"censored", e.counts.censored}};

    Csv csv({"face", "count"});
    csv.row({"front", std::to_string(e.counts.front)});
    csv.row({"back", std::to_string(e.counts.back)});
    csv.row({"side", std::to_string(e.counts.side)});
    csv.row({"censored", std::to_string(e.counts.censored)});
    ar.files["exit_counts.csv"] = csv.str();

    if (e.counts.censored > 0)
    {
        ar.warnings.push_back("walk: " + std::to_string(e.counts.censored)
                              + " walks censored at step cap " + std::to_string(e.step_cap));
    }
}

//---------------------------------------------------------------------------//
// green
//---------------------------------------------------------------------------//

void run_green(Context const& ctx, Archive& ar, Json& report)
{
    Json const& b = ctx.config["green"];
    int const d = ctx.law.dimension();
    SlabSpec const slab{b["L"].get<int>(), b["W"].get<int>(), d};
    Environment const env(ctx.law, slab.domain(), ctx.env_seed);
    auto const spec = FieldSpec::parse(b["field"].get<std::string>(), d);
    auto const f = make_field(env, slab, spec);
    std::string const method = b["method"].get<std::string>();

    report["slab"] = Json{{"L", slab.L}, {"W", slab.W}, {"d", d}, {"states", slab.state_count()}};
    report["field"] = spec.describe(d);
    report["method"] = method;

    std::vector<std::string> header;
    for (int i = 1; i <= d; ++i)
        header.push_back("x" + std::to_string(i));
    header.push_back("value");

    if (method == "exact")
    {
        GreenOptions go;
        go.state_cap = ctx.state_cap;
        auto const g = green_apply_exact(env, slab, f, go);
        report["residual"] = num(g.residual);
        report["iterations"] = g.iterations;
        report["value_at_origin"] = num(g.at(Site{}));
        Csv csv(header);
        for (std::size_t s = 0; s < g.sites.size(); ++s)
        {
            std::vector<std::string> row;
            for (int i = 0; i < d; ++i)
                row.push_back(std::to_string(g.sites[s][i]));
            row.push_back(fmt(g.values[s]));
            csv.row(row);
        }
        ar.files["green.csv"] = csv.str();

        int const M = b["hat_rho_M"].get<int>();
        if (M > 0)
        {
            if (spec.kind != FieldKind::drift_e1)
            {
                ar.errors["hat_rho"] = "hat_rho needs field drift-e1";
            }
            else
            {
                auto const hr = hat_rho_from_field(g, M);
                report["hat_rho"] = Json{{"value", num(hr.value)},
                                         {"argmax", site_json(hr.argmax, d)},
                                         {"min_green", num(hr.min_green)},
                                         {"sites_evaluated", hr.sites_evaluated},
                                         {"sites_total", hr.sites_total},
                                         {"denominator_positive", hr.denominator_positive}};
            }
        }
    }
    else
    {
        GreenMcOptions mo;
        mo.workers = ctx.workers;
        mo.step_cap = b["step_cap"].get<std::int64_t>();
        if (!b["starts"].empty())
        {
            mo.starts.clear();
            for (auto const& s : b["starts"])
            {
                Site x{};
                for (int i = 0; i < d; ++i)
                    x[i] = s[i].get<int>();
                mo.starts.push_back(x);
            }
        }
        auto const g = green_apply_mc(env, slab, f, b["n_walks"].get<std::int64_t>(),
                                      ctx.walk_seed, mo);
        report["n_walks"] = b["n_walks"];
        report["censored_fraction"] = num(g.censored_fraction);
        header.push_back("std_error");
        Csv csv(header);
        for (std::size_t s = 0; s < g.sites.size(); ++s)
        {
            std::vector<std::string> row;
            for (int i = 0; i < d; ++i)
                row.push_back(std::to_string(g.sites[s][i]));
            row.push_back(fmt(g.values[s]));
            row.push_back(fmt(g.std_errors[s]));
            csv.row(row);
        }
        ar.files["green.csv"] = csv.str();
        if (g.censored_fraction > 0)
        {
            ar.warnings.push_back("green: censored fraction " + fmt(g.censored_fraction));
        }
    }
}

//---------------------------------------------------------------------------//
// criterion
//---------------------------------------------------------------------------//

PipelineConfig pipeline_config(Json const& b, int workers)
{
    PipelineConfig pc;
    pc.r = b["r"].get<int>();
    pc.constants.c1 = b["c1"].get<double>();
    pc.constants.c2 = b["c2"].get<double>();
    pc.moment_samples = b["moment_samples"].get<std::int64_t>();
    pc.workers = workers;
    Json const& s = b["surrogate"];
    auto& sur = pc.surrogate;
    sur.enabled = s["enabled"].get<bool>();
    sur.M = s["M"].get<int>();
    sur.L = s["L"].get<int>();
    sur.W = s["W"].get<int>();
    sur.H = s["H"].get<int>();
    sur.h = s["h"].get<int>();
    sur.gamma1 = s["gamma1"].get<double>();
    sur.gamma1_floor = s["gamma1_floor"].get<double>();
    sur.n_env = s["n_env"].get<std::int64_t>();
    sur.n_walks = s["n_walks"].get<std::int64_t>();
    sur.hat_rho_stride = s["hat_rho_stride"].get<int>();
    sur.p_stride = s["p_stride"].get<int>();
    return pc;
}

Json criterion_json(CriterionReport const& r)
{
    Json out;
    out["inputs"] = Json{{"law_id", r.law_id}, {"d", r.d}, {"r", r.r}};
    out["moments"] = Json{{"epsilon", num(r.epsilon)},
                          {"lambda", num(r.lambda)},
                          {"sigma_2", est(r.sigma_2)},
                          {"sigma_2r", est(r.sigma_2r)},
                          {"kappa", num(r.kappa)}};
    if (r.schedule)
    {
        auto const& s = *r.schedule;
        out["schedule"] = Json{{"r", s.r},
                               {"epsilon", num(s.epsilon)},
                               {"sigma_2r", num(s.sigma_2r)},
                               {"lambda0", num(s.lambda0)},
                               {"M", num(s.M)},
                               {"L", num(s.L)},
                               {"H", num(s.H)},
                               {"h", num(s.h)},
                               {"gamma1", num(s.gamma1)},
                               {"c1", num(s.c1)},
                               {"c2", num(s.c2)},
                               {"flags", Json{{"2h<=H", s.h_fits},
                                              {"H<=M^3/32", s.H_fits},
                                              {"sigma_2r>eps^2", s.not_too_small},
                                              {"eps_L<3/4", s.eps_L_small},
                                              {"0<gamma1<=1", s.gamma1_in_range},
                                              {"regime_reached", s.regime_reached}}},
                               {"log_M", num(s.log_M)},
                               {"log_regime_threshold", num(s.log_regime_threshold)}};
    }
    else
    {
        out["schedule"] = nullptr;
    }
    out["delta_inverse"] = r.delta_inverse ? Json{{"value", num(r.delta_inverse->value)},
                                                  {"log", num(r.delta_inverse->log_value)}}
                                           : Json(nullptr);
    out["log_effective_threshold"] = num(r.log_effective_threshold);

    Json sur;
    sur["ran"] = r.surrogate_ran;
    if (r.surrogate_ran)
    {
        auto const& s = r.surrogate;
        sur["sizes"] = Json{{"M", s.M}, {"L", s.L}, {"W", s.W}, {"H", s.H}, {"h", s.h},
                            {"n_env", s.n_env}, {"n_walks", s.n_walks}};
        sur["gamma1"] = num(r.surrogate_gamma1);
        sur["hat_rho_mean"] = est(r.hat_rho_mean);
        sur["hat_rho_max"] = num(r.hat_rho_max);
        sur["p_hat"] = est(r.p_hat);
        sur["p_coverage"] = num(r.p_coverage);
        sur["back_exit"] = est(r.back_exit);
        sur["back_exit_censored"] = num(r.back_exit_censored);
        sur["q_exact_mean"] = est(r.q_exact_mean);
        sur["sqrt_rho_mean"] = est(r.sqrt_rho_mean);
        sur["delta_inverse"] = r.surrogate_delta_inverse
                                   ? Json{{"value", num(r.surrogate_delta_inverse->value)},
                                          {"log", num(r.surrogate_delta_inverse->log_value)}}
                                   : Json(nullptr);
        if (r.surrogate_lemma1)
        {
            auto const& l = *r.surrogate_lemma1;
            sur["lemma1_bound"] = Json{{"value", num(l.value)},
                                       {"log", num(l.log_value)},
                                       {"status", to_string(l.status)},
                                       {"M_bar", num(l.M_bar)}};
        }
        else
        {
            sur["lemma1_bound"] = nullptr;
        }
        sur["log_effective_threshold"] = num(r.surrogate_log_effective_threshold);
    }
    out["surrogate"] = sur;

    Json verdicts = Json::object();
    for (auto const& [name, v] : r.verdicts)
        verdicts[name] = verdict_json(v);
    out["verdicts"] = verdicts;
    Json errors = Json::object();
    for (auto const& [field, msg] : r.errors)
        errors[field] = msg;
    out["errors"] = errors;
    return out;
}

std::vector<std::string> criterion_csv_header()
{
    return {"law_id", "d", "r", "epsilon", "lambda", "sigma_2", "sigma_2r",
            "lambda0", "M", "L", "delta_inverse", "theorem_condition", "kalikow_shortcut",
            "not_too_small", "hat_rho_mean", "hat_rho_se", "p_hat", "p_se", "back_exit",
            "lemma1_bound", "errors"};
}

std::string verdict_cell(CriterionReport const& r, std::string const& name)
{
    auto const it = r.verdicts.find(name);
    return it == r.verdicts.end() ? "" : to_string(it->second.status);
}

std::vector<std::string> criterion_csv_row(CriterionReport const& r)
{
    auto opt = [](bool has, double x) { return has ? fmt(x) : std::string(); };
    bool const sched = r.schedule.has_value();
    return {"\"" + r.law_id + "\"",
            std::to_string(r.d),
            std::to_string(r.r),
            fmt(r.epsilon),
            fmt(r.lambda),
            fmt(r.sigma_2.value),
            fmt(r.sigma_2r.value),
            opt(sched, sched ? r.schedule->lambda0 : 0),
            opt(sched, sched ? r.schedule->M : 0),
            opt(sched, sched ? r.schedule->L : 0),
            opt(r.delta_inverse.has_value(), r.delta_inverse ? r.delta_inverse->value : 0),
            verdict_cell(r, "theorem_condition"),
            verdict_cell(r, "kalikow_shortcut"),
            verdict_cell(r, "not_too_small"),
            opt(r.surrogate_ran, r.hat_rho_mean.value),
            opt(r.surrogate_ran, r.hat_rho_mean.std_error),
            opt(r.surrogate_ran, r.p_hat.value),
            opt(r.surrogate_ran, r.p_hat.std_error),
            opt(r.surrogate_ran, r.back_exit.value),
            opt(r.surrogate_lemma1.has_value(),
                r.surrogate_lemma1 ? r.surrogate_lemma1->value : 0),
            std::to_string(r.errors.size())};
}

void run_criterion(Context const& ctx, Archive& ar, Json& report)
{
    auto const pc = pipeline_config(ctx.config["criterion"], ctx.workers);
    auto const r = run_pipeline(ctx.law, pc, derive_seed(ctx.master, "criterion"));
    report["criterion"] = criterion_json(r);
    Csv csv(criterion_csv_header());
    csv.row(criterion_csv_row(r));
    ar.files["criterion.csv"] = csv.str();
    for (auto const& [field, msg] : r.errors)
        ar.errors["criterion/" + field] = msg;
    if (r.surrogate_ran && r.back_exit_censored > 0)
        ar.warnings.push_back("criterion: back-exit censored fraction " + fmt(r.back_exit_censored));
}

//---------------------------------------------------------------------------//
// sweep
//---------------------------------------------------------------------------//

EnvironmentLaw cell_law(Json const& base, Json const& cell)
{
    Json block = base;
    auto& p = block["params"];
    int const d = block["d"].get<int>();
    std::string const kind = block["kind"].get<std::string>();
    if (cell.contains("lambda"))
        p["lambda"] = cell["lambda"];
    if (cell.contains("amplitude"))
        p["amplitude"] = cell["amplitude"];
    if (cell.contains("epsilon") && !cell.contains("amplitude"))
    {
        double const eps = cell["epsilon"].get<double>();
        double const lam = std::abs(p["lambda"].get<double>());
        if (kind == "deterministic-drift")
        {
            p["lambda"] = eps / (2.0 * d);
        }
        else if (kind == "two-point")
        {
            p["amplitude"] = eps / (4.0 * d) - lam / 2.0;
        }
        else if (kind == "isotropic-plus-drift")
        {
            p["amplitude"] = (eps / (4.0 * d) - lam / 2.0) / (2.0 - 1.0 / d);
        }
        else
        {
            throw std::invalid_argument("sweep: epsilon cells need a parametric law kind");
        }
    }
    return law_from_json(block);
}

void run_sweep(Context const& ctx, Archive& ar, Json& report, std::string const& id)
{
    Json const& b = ctx.config["sweep"];
    auto header = criterion_csv_header();
    header.insert(header.begin(), "cell_id");
    Csv csv(header);
    Json cells = Json::array();
    for (std::size_t i = 0; i < b["cells"].size(); ++i)
    {
        Json const& cell = b["cells"][i];
        char cid[17];
        std::snprintf(cid, sizeof cid, "%016llx",
                      static_cast<unsigned long long>(fnv1a(id + "/" + cell.dump())));
        Json entry{{"cell_id", cid}, {"cell", cell}};
        try
        {
            auto const law = cell_law(ctx.config["law"], cell);
            Json block = b;
            if (cell.contains("r"))
                block["r"] = cell["r"].get<int>();
            auto const pc = pipeline_config(block, ctx.workers);
            auto const r = run_pipeline(law, pc, derive_seed(ctx.master, fnv1a(cid)));
            entry["report"] = criterion_json(r);
            auto row = criterion_csv_row(r);
            row.insert(row.begin(), cid);
            csv.row(row);
            for (auto const& [field, msg] : r.errors)
                ar.errors[std::string("sweep/") + cid + "/" + field] = msg;
        }
        catch (std::exception const& e)
        {
            ar.errors[std::string("sweep/") + cid] = e.what();
            entry["error"] = e.what();
        }
        cells.push_back(entry);
    }
    report["cells"] = cells;
    ar.files["sweep.csv"] = csv.str();
}

//---------------------------------------------------------------------------//
// concentration
//---------------------------------------------------------------------------//

void run_concentration(Context const& ctx, Archive& ar, Json& report)
{
    Json const& b = ctx.config["concentration"];
    int const d = ctx.law.dimension();
    SlabSpec const slab{b["L"].get<int>(), b["W"].get<int>(), d};
    std::uint64_t const seed = derive_seed(ctx.master, "concentration");
    ZOptions zo;
    zo.workers = ctx.workers;
    zo.green.state_cap = ctx.state_cap;
    int const r = b["r"].get<int>();

    for (auto const& check : b["checks"])
    {
        std::string const name = check.get<std::string>();
        try
        {
            if (name == "bblm")
            {
                EfronSteinOptions eo;
                eo.inner_replicates = b["inner_replicates"].get<int>();
                eo.workers = ctx.workers;
                eo.solve_cap = ctx.solve_cap;
                eo.green.state_cap = ctx.state_cap;
                auto const q = b["q"].get<std::vector<double>>();
                auto const rep = bblm_check(ctx.law, slab, q, b["n_env"].get<std::int64_t>(),
                                            derive_seed(seed, "bblm"), eo);
                Json rows = Json::array();
                for (auto const& row : rep.rows)
                {
                    rows.push_back(Json{{"q", num(row.q)},
                                        {"constant", num(row.constant)},
                                        {"lhs", est(row.lhs)},
                                        {"rhs", est(row.rhs)},
                                        {"margin", num(row.margin)},
                                        {"combined_se", num(row.combined_se)},
                                        {"holds", row.holds}});
                    if (!row.holds)
                        ar.warnings.push_back("bblm: inequality violated beyond 3 SE at q = "
                                              + fmt(row.q));
                }
                report["bblm"] = Json{{"n_env", rep.n_env},
                                      {"inner_replicates", rep.inner_replicates},
                                      {"z_mean", est(rep.z_mean)},
                                      {"z_variance", num(rep.z_variance)},
                                      {"v_plus_mean", est(rep.v_plus_mean)},
                                      {"v_minus_mean", est(rep.v_minus_mean)},
                                      {"efron_stein_holds", rep.efron_stein_holds},
                                      {"rows", rows},
                                      {"bias_note", rep.bias_note}};
            }
            else if (name == "mean")
            {
                auto const rep = mean_bound_check(ctx.law, slab, b["n_env"].get<std::int64_t>(),
                                                  derive_seed(seed, "mean"), zo);
                report["mean_bound"] = Json{{"precondition_ok", rep.precondition_ok},
                                            {"ratio", est(rep.ratio)},
                                            {"target", num(rep.target)},
                                            {"holds", rep.holds},
                                            {"hypothesis_lhs", num(rep.hypothesis_lhs)},
                                            {"hypothesis_rhs", num(rep.hypothesis_rhs)},
                                            {"note", rep.note}};
            }
            else if (name == "tail")
            {
                auto const ens = sample_Z(ctx.law, slab, b["tail_n_env"].get<std::int64_t>(),
                                          derive_seed(seed, "tail"), zo);
                auto u = b["u"].get<std::vector<double>>();
                if (u.empty())
                {
                    // empirical quantiles of |Z - mean|
                    std::vector<double> dev(ens.z.size());
                    std::transform(ens.z.begin(), ens.z.end(), dev.begin(),
                                   [m = ens.mean.value](double x) { return std::abs(x - m); });
                    std::sort(dev.begin(), dev.end());
                    for (double q : {0.5, 0.9, 0.99})
                        u.push_back(dev[static_cast<std::size_t>(q * (dev.size() - 1))]);
                }
                double const sigma = sigma_of(ctx.law, r, 1'000'000, derive_seed(seed, "sigma")).value;
                auto const rep = tail_check(ens, r, u, sigma, b["c7"].get<double>());
                Csv csv({"u", "empirical_tail", "empirical_se", "markov_bound", "paper_form_bound"});
                Json rows = Json::array();
                for (auto const& row : rep.rows)
                {
                    csv.row({fmt(row.u), fmt(row.empirical), fmt(row.empirical_se), fmt(row.markov),
                             fmt(row.paper_form)});
                    rows.push_back(Json{{"u", num(row.u)},
                                        {"empirical", num(row.empirical)},
                                        {"markov", num(row.markov)},
                                        {"paper_form", num(row.paper_form)},
                                        {"consistent", row.consistent}});
                }
                ar.files["tail.csv"] = csv.str();
                report["tail"] = Json{{"r", rep.r},
                                      {"c7", num(rep.c7)},
                                      {"sigma_2r", num(rep.sigma_2r)},
                                      {"central_moment_2r", num(rep.central_moment_2r)},
                                      {"z_mean", est(ens.mean)},
                                      {"max_residual", num(ens.max_residual)},
                                      {"rows", rows}};
            }
            else if (name == "scaling")
            {
                auto const amps = b["scaling_amplitudes"].get<std::vector<double>>();
                auto const rows = sigma_scaling(d, slab, amps, r, b["scaling_n_env"].get<std::int64_t>(),
                                                derive_seed(seed, "scaling"), zo);
                Csv csv({"amplitude", "sigma_2r", "central_norm", "central_norm_se", "ratio"});
                Json out = Json::array();
                for (auto const& row : rows)
                {
                    csv.row({fmt(row.amplitude), fmt(row.sigma_2r), fmt(row.central_norm.value),
                             fmt(row.central_norm.std_error), fmt(row.ratio)});
                    out.push_back(Json{{"amplitude", num(row.amplitude)},
                                       {"sigma_2r", num(row.sigma_2r)},
                                       {"central_norm", est(row.central_norm)},
                                       {"ratio", num(row.ratio)}});
                }
                ar.files["scaling.csv"] = csv.str();
                report["sigma_scaling"] = out;
            }
        }
        catch (std::exception const& e)
        {
            ar.errors["concentration/" + name] = e.what();
        }
    }
}

//---------------------------------------------------------------------------//

void write_file(fs::path const& path, std::string const& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

RunOutcome run(Json const& raw, RunOptions const& opts)
{
    RunOutcome outcome;
    Json const config = apply_overrides(raw, opts);
    auto const v = validate(config);
    if (!v.ok())
    {
        outcome.exit_code = 2;
        for (auto const& d : v.diagnostics)
        {
            if (d.severity == "error")
                outcome.errors[d.path] = d.message;
        }
        return outcome;
    }
    Json const normalized = normalize_config(config);
    std::string const id = run_id(normalized);
    outcome.run_id = id;

    std::uint64_t const master = normalized["seeds"]["master"].get<std::uint64_t>();
    Json const& law_seed = normalized["law"]["seed"];
    Context ctx{normalized,
                law_from_json(normalized["law"]),
                std::max(opts.workers, 1),
                master,
                law_seed.is_null() ? derive_seed(master, "env") : law_seed.get<std::uint64_t>(),
                derive_seed(master, "walk"),
                normalized["caps"]["state_cap"].get<std::int64_t>(),
                normalized["caps"]["solve_cap"].get<std::int64_t>()};

    Archive ar;
    for (auto const& d : v.diagnostics)
        ar.warnings.push_back("validate: " + d.path + ": " + d.message);

    std::string const command = normalized["command"].get<std::string>();
    Json report;
    report["schema_version"] = kSchemaVersion;
    report["run_id"] = id;
    report["command"] = command;
    report["seeds"] = seed_manifest(ctx);
    report["law"] = law_json(ctx.law);
    try
    {
        if (command == "walk")
            run_walk(ctx, ar, report);
        else if (command == "green")
            run_green(ctx, ar, report);
        else if (command == "criterion")
            run_criterion(ctx, ar, report);
        else if (command == "concentration")
            run_concentration(ctx, ar, report);
        else
            run_sweep(ctx, ar, report, id);
    }
    catch (std::exception const& e)
    {
        ar.errors[command] = e.what();
    }

    Json errors = Json::object();
    for (auto const& [k, m] : ar.errors)
        errors[k] = m;
    report["errors"] = errors;

    ar.files["config.json"] = normalized.dump(2) + "\n";
    ar.files["report.json"] = report.dump(2) + "\n";
    std::string log;
    for (auto const& w : ar.warnings)
        log += w + "\n";
    for (auto const& [k, m] : ar.errors)
        log += "error: " + k + ": " + m + "\n";
    ar.files["warnings.log"] = log;

    // write to a temporary sibling, then rename into place
    fs::create_directories(opts.out);
    fs::path const final_dir = opts.out / id;
    fs::path const tmp_dir = opts.out / (".tmp-" + id);
    fs::remove_all(tmp_dir);
    fs::create_directories(tmp_dir);
    for (auto const& [name, content] : ar.files)
        write_file(tmp_dir / name, content);
    fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);

    outcome.archive = final_dir;
    outcome.warnings = ar.warnings;
    outcome.errors = ar.errors;
    outcome.exit_code = ar.errors.empty() ? 0 : 3;
    return outcome;
}

}  // namespace rwre
