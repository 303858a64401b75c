// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "photoncorr/correlator.hpp"
#include "photoncorr/deadtime.hpp"
#include "photoncorr/errors.hpp"
#include "photoncorr/extract.hpp"
#include "photoncorr/qmt.hpp"
#include "photoncorr/rng.hpp"
#include "photoncorr/sources.hpp"
#include "photoncorr/timetag.hpp"
#include "svg.hpp"

namespace photoncorr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

fs::path out_path(const fs::path& p, const GlobalOptions& opt) {
    if (p.is_absolute() || opt.out_dir.empty()) return p;
    fs::create_directories(opt.out_dir);
    return opt.out_dir / p;
}

json apply_overrides(json config, const GlobalOptions& opt) {
    if (opt.seed) config["seed"] = *opt.seed;
    return config;
}

void write_json(const fs::path& path, json doc, const std::string& hash) {
    doc["config_hash"] = hash;
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw config_error(path.string() + ": write failed");
}

void write_csv(const fs::path& path, const std::string& hash, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << "# config_hash=" << hash << '\n' << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << num(row[i]);
        out << '\n';
    }
    if (!out) throw config_error(path.string() + ": write failed");
}

StreamFormat format_for(const fs::path& p) {
    return p.extension() == ".csv" ? StreamFormat::csv : StreamFormat::binary;
}

TimeTagStream load_stream(const std::string& path) {
    return read_stream(path, format_for(path));
}

TimeTagStream generate_source(ConfigView& cfg, double span_s, std::int64_t resolution_ps,
                              std::uint64_t seed) {
    const auto source = cfg.object("source");
    if (!source) throw config_error("simulate: missing 'source'");
    ConfigView src(*source, "source");
    const std::string type = src.str("type");
    if (type == "poisson") {
        PoissonSource p{src.number("rate_cps")};
        src.finish();
        return generate_poisson(p, span_s, seed, resolution_ps);
    }
    if (type == "cox") {
        CoxSource c;
        const std::string law = src.str("law");
        if (law == "constant")
            c.law = IntensityLaw::constant;
        else if (law == "exponential")
            c.law = IntensityLaw::exponential;
        else if (law == "two_state")
            c.law = IntensityLaw::two_state;
        else
            throw config_error("source.law: expected constant/exponential/two_state");
        c.mean_rate_cps = src.number_or("mean_rate_cps", 0.0);
        c.dwell_time_s = src.number_or("dwell_time_s", 0.0);
        c.level1_cps = src.number_or("level1_cps", 0.0);
        c.level2_cps = src.number_or("level2_cps", 0.0);
        c.rate12_hz = src.number_or("rate12_hz", 0.0);
        c.rate21_hz = src.number_or("rate21_hz", 0.0);
        src.finish();
        return generate_cox(c, span_s, seed, resolution_ps);
    }
    if (type == "micromaser") {
        MicromaserSource m;
        m.coupling_g_rad_s = src.number_or("coupling_g_rad_s", m.coupling_g_rad_s);
        m.t_int_s = src.number_or("t_int_s", m.t_int_s);
        m.cavity_linewidth_hz = src.number_or("cavity_linewidth_hz", m.cavity_linewidth_hz);
        m.atom_rate_cps = src.number("atom_rate_cps");
        m.detection_efficiency = src.number_or("detection_efficiency", 1.0);
        if (m.detection_efficiency <= 0.0 || m.detection_efficiency > 1.0)
            throw config_error("source.detection_efficiency must be in (0, 1]");
        if (src.has("n_initial"))
            m.n_initial = static_cast<std::uint32_t>(src.integer("n_initial"));
        src.finish();
        return generate_micromaser(m, span_s, seed, resolution_ps);
    }
    throw config_error("source.type: expected poisson/cox/micromaser");
}

std::vector<double> parse_tau_grid(ConfigView& cfg) {
    if (const auto grid = cfg.number_list("tau_grid_s")) return *grid;
    const double start = cfg.number("tau_start_s");
    const double stop = cfg.number("tau_stop_s");
    const auto n = cfg.integer("n_tau");
    if (n < 2 || stop <= start) throw config_error("bad tau grid specification");
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] =
            start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

json estimate_json(const CorrelationEstimate& est) {
    return json{{"value", est.value},
                {"std_error", est.std_error},
                {"bin_time_s", est.bin_time_s},
                {"coincidences", est.n_pairs_or_triples}};
}

json result_json(const ExtractionResult& r) {
    json j{{"g2_zero", r.g2_zero},           {"g2_err", r.g2_err},
           {"g3_zero", r.g3_zero},           {"g3_err", r.g3_err},
           {"ratio_defined", r.ratio_defined}, {"fit_order", r.fit_order},
           {"n_points", r.n_points_used},    {"chi2_reduced", r.chi2_reduced},
           {"coefficients", r.coefficients}, {"flux_st_free_cps", r.flux_st_free},
           {"flux_sp_free_cps", r.flux_sp_free}, {"warnings", r.warnings}};
    if (r.ratio_defined) {
        j["ratio"] = r.ratio;
        j["ratio_err"] = r.ratio_err;
    } else {
        j["ratio"] = nullptr;
    }
    return j;
}

} // namespace

void cmd_simulate(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "simulate");

    const auto seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    const double span_s = cfg.number("span_s");
    const auto resolution_ps = cfg.integer_or("resolution_ps", 1);
    const std::string prefix = cfg.str("out_prefix");

    TimeTagStream source = generate_source(cfg, span_s, resolution_ps, derive_seed(seed, 0));

    std::vector<TimeTagStream> outputs;
    if (const auto bs = cfg.object("beamsplit")) {
        ConfigView split(*bs, "beamsplit");
        const double p = split.number("p");
        const bool three_way = split.flag_or("three_way", false);
        split.finish();
        auto [first, rest] = beamsplit(source, p, derive_seed(seed, 1));
        if (three_way) {
            auto [second, third] = beamsplit(rest, 0.5, derive_seed(seed, 2));
            second.channel = 1;
            third.channel = 2;
            outputs = {std::move(first), std::move(second), std::move(third)};
        } else {
            outputs = {std::move(first), std::move(rest)};
        }
    } else {
        outputs = {std::move(source)};
    }

    if (const auto det = cfg.object("detectors")) {
        if (!det->is_array() || det->size() != outputs.size())
            throw config_error("detectors: expected one entry per output stream");
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            ConfigView d((*det)[i], "detectors[" + std::to_string(i) + "]");
            DetectorSpec spec;
            spec.dead_time_s = d.number_or("dead_time_s", 0.0);
            spec.efficiency = d.number_or("efficiency", 1.0);
            if (spec.efficiency <= 0.0 || spec.efficiency > 1.0)
                throw config_error("detectors: efficiency must be in (0, 1]");
            spec.channel = static_cast<std::uint16_t>(i);
            d.finish();
            outputs[i] = detect(outputs[i], spec, derive_seed(seed, 16 + i));
        }
    }
    cfg.finish();

    json manifest{{"seed", seed}, {"files", json::array()}};
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        outputs[i].channel = static_cast<std::uint16_t>(i);
        const fs::path file =
            out_path(prefix + "_ch" + std::to_string(i) + ".ptag", opt);
        write_stream(outputs[i], file, StreamFormat::binary);
        const auto st = stats(outputs[i]);
        manifest["files"].push_back(json{{"path", file.string()},
                                         {"channel", i},
                                         {"count", st.count},
                                         {"flux_cps", st.flux_cps}});
    }
    write_json(out_path(prefix + "_manifest.json", opt), std::move(manifest), hash);
}

void cmd_filter(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    ConfigView cfg(config, "filter");
    const auto input = cfg.str("input");
    const auto output = cfg.str("output");
    DetectorSpec spec;
    spec.dead_time_s = cfg.number_or("dead_time_s", 0.0);
    spec.efficiency = cfg.number_or("efficiency", 1.0);
    const auto seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    cfg.finish();

    const TimeTagStream in = load_stream(input);
    spec.channel = in.channel;
    const TimeTagStream filtered = detect(in, spec, seed);
    write_stream(filtered, out_path(output, opt), format_for(output));
}

void cmd_correlate(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "correlate");
    const auto start = load_stream(cfg.str("start"));
    const auto stop = load_stream(cfg.str("stop"));
    const double bin_time = cfg.number("bin_time_s");
    const double max_delay = cfg.number("max_delay_s");
    const auto csv_path = cfg.str("output_csv");
    const auto json_path = cfg.str_or("output_json", "");
    cfg.finish();

    const auto hist = g2_histogram(start, stop, bin_time, max_delay, opt.threads);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < hist.values.size(); ++k)
        rows.push_back({hist.delays_s[k], hist.values[k], hist.errors[k]});
    write_csv(out_path(csv_path, opt), hash, "delay_s,g2,err", rows);

    if (!json_path.empty()) {
        const auto zero = g2_zero(start, stop, bin_time);
        write_json(out_path(json_path, opt), json{{"g2_zero", estimate_json(zero)}}, hash);
    }
}

void cmd_g3_direct(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "g3-direct");
    const auto s1 = load_stream(cfg.str("s1"));
    const auto s2 = load_stream(cfg.str("s2"));
    const auto s3 = load_stream(cfg.str("s3"));
    const double bin_time = cfg.number("bin_time_s");
    const auto json_path = cfg.str("output_json");
    cfg.finish();

    const auto est = g3_zero_direct(s1, s2, s3, bin_time);
    write_json(out_path(json_path, opt), json{{"g3_zero_direct", estimate_json(est)}}, hash);
}

namespace {

void write_scan_csv(const fs::path& path, const std::string& hash, const DeadTimeScan& scan) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < scan.tau_s.size(); ++i)
        rows.push_back({scan.tau_s[i], scan.g2_obs[i].value, scan.g2_obs[i].std_error,
                        scan.flux_st_obs[i], scan.flux_sp_obs[i]});
    write_csv(path, hash, "tau_s,g2_obs,err,flux_st,flux_sp", rows);
}

} // namespace

void cmd_scan(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "scan");
    const auto start = load_stream(cfg.str("start"));
    const auto stop = load_stream(cfg.str("stop"));
    const double physical_tau = cfg.number("physical_tau_s");
    const auto grid = parse_tau_grid(cfg);
    const double bin_time = cfg.number("bin_time_s");
    const auto csv_path = cfg.str("output_csv");
    cfg.finish();

    const auto scan = run_scan(start, stop, physical_tau, grid, bin_time);
    write_scan_csv(out_path(csv_path, opt), hash, scan);
}

void cmd_extract(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "extract");
    const auto start = load_stream(cfg.str("start"));
    const auto stop = load_stream(cfg.str("stop"));
    const double physical_tau = cfg.number("physical_tau_s");
    const auto grid = parse_tau_grid(cfg);
    const double bin_time = cfg.number("bin_time_s");
    const int fit_order = static_cast<int>(cfg.integer_or("fit_order", 2));
    const std::string prefix = cfg.str("output_prefix");
    cfg.finish();

    const auto scan = run_scan(start, stop, physical_tau, grid, bin_time);
    write_scan_csv(out_path(prefix + "_scan.csv", opt), hash, scan);

    // convergence series over n_points prefixes, final result on the full grid
    json series = json::array();
    std::vector<double> series_n, series_ratio, series_ratio_err;
    ExtractionResult final_result;
    for (int n = fit_order + 2; n <= static_cast<int>(grid.size()); ++n) {
        const auto r = fit_scan(scan, fit_order, n);
        json entry = result_json(r);
        series.push_back(entry);
        if (r.ratio_defined) {
            series_n.push_back(n);
            series_ratio.push_back(r.ratio);
            series_ratio_err.push_back(r.ratio_err);
        }
        if (n == static_cast<int>(grid.size())) final_result = r;
    }

    json doc = result_json(final_result);
    doc["series"] = std::move(series);
    doc["scan_warnings"] = scan.warnings;
    write_json(out_path(prefix + "_result.json", opt), std::move(doc), hash);

    // observed scan with the fitted polynomial overlaid
    PlotSpec scan_plot;
    scan_plot.title = "g2_obs vs dead time";
    scan_plot.x_label = "dead time (ns)";
    scan_plot.y_label = "g2_obs(0)";
    scan_plot.provenance = hash;
    PlotSeries data;
    for (std::size_t i = 0; i < scan.tau_s.size(); ++i) {
        data.x.push_back(scan.tau_s[i] * 1e9);
        data.y.push_back(scan.g2_obs[i].value);
        data.yerr.push_back(scan.g2_obs[i].std_error);
    }
    data.label = "observed";
    PlotSeries curve;
    curve.color = "#2ca02c";
    curve.line = true;
    curve.points = false;
    curve.label = "fit";
    const double phi_sum = final_result.flux_st_free + final_result.flux_sp_free;
    for (int i = 0; i <= 200; ++i) {
        const double tau = grid.front() + (grid.back() - grid.front()) * i / 200.0;
        double y = 0.0, xpow = 1.0;
        for (const double c : final_result.coefficients) {
            y += c * xpow;
            xpow *= phi_sum * tau;
        }
        curve.x.push_back(tau * 1e9);
        curve.y.push_back(y);
    }
    scan_plot.series = {std::move(curve), std::move(data)};
    write_svg_plot(out_path(prefix + "_scan.svg", opt), scan_plot);

    PlotSpec ratio_plot;
    ratio_plot.title = "(1 - g3) / (1 - g2) vs fit points";
    ratio_plot.x_label = "points in fit";
    ratio_plot.y_label = "ratio";
    ratio_plot.provenance = hash;
    ratio_plot.reference_y = 3.0;
    PlotSeries ratios;
    ratios.x = std::move(series_n);
    ratios.y = std::move(series_ratio);
    ratios.yerr = std::move(series_ratio_err);
    ratio_plot.series = {std::move(ratios)};
    write_svg_plot(out_path(prefix + "_ratio.svg", opt), ratio_plot);
}

void cmd_qmt(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "qmt");

    QmtParams params;
    params.coupling_g_rad_s = cfg.number_or("coupling_g_rad_s", 2.0 * kPi * 190e3);
    params.t_int_s = cfg.number_or("t_int_s", 0.1e-6);
    if (cfg.has("kappa_rad_s"))
        params.kappa_rad_s = cfg.number("kappa_rad_s");
    else
        params.kappa_rad_s = 2.0 * kPi * cfg.number_or("cavity_linewidth_hz", 138e3);
    params.n_max = static_cast<int>(cfg.integer_or("n_max", 4096));
    const std::string prefix = cfg.str("output_prefix");

    std::vector<double> rates;
    if (const auto scan = cfg.number_list("atom_rate_scan_cps"))
        rates = *scan;
    else
        rates = {cfg.number("atom_rate_cps")};
    cfg.finish();

    json moments = json::array();
    for (std::size_t i = 0; i < rates.size(); ++i) {
        params.atom_rate_cps = rates[i];
        const auto dist = steady_state(params);
        const std::string tag = rates.size() > 1 ? "_r" + std::to_string(i) : "";

        // Poisson reference with the same mean, built in log space
        std::vector<double> poisson(dist.p.size());
        if (dist.mean_n > 0) {
            double log_pn = -dist.mean_n;
            for (std::size_t n = 0; n < poisson.size(); ++n) {
                poisson[n] = std::exp(log_pn);
                log_pn += std::log(dist.mean_n / (static_cast<double>(n) + 1.0));
            }
        } else {
            poisson[0] = 1.0;
        }

        std::vector<std::vector<double>> rows;
        for (std::size_t n = 0; n < dist.p.size(); ++n)
            rows.push_back({static_cast<double>(n), dist.p[n], poisson[n]});
        write_csv(out_path(prefix + tag + "_dist.csv", opt), hash, "n,p,p_poisson", rows);

        json entry{{"atom_rate_cps", rates[i]},
                   {"mean_n", dist.mean_n},
                   {"q_mandel", dist.q_mandel},
                   {"gamma_cqm", dist.skewness},
                   {"gamma_poi", dist.mean_n > 0 ? 1.0 / std::sqrt(dist.mean_n) : 0.0},
                   {"g2_zero", dist.g2_zero},
                   {"g3_zero", dist.g3_zero},
                   {"g3_expansion", skewness_expansion(dist)},
                   {"multimodal", dist.multimodal}};
        try {
            const auto check = relation_check(dist);
            entry["ratio"] = check.ratio;
            entry["residual"] = check.residual;
        } catch (const regime_error& e) {
            entry["ratio"] = nullptr;
            entry["ratio_note"] = e.what();
        }
        moments.push_back(std::move(entry));

        // plot the populated region only
        PlotSpec plot;
        plot.title = "photon statistics, atom rate " + num(rates[i]) + " cps";
        plot.x_label = "n";
        plot.y_label = "p(n)";
        plot.provenance = hash;
        PlotSeries ps, pois;
        std::size_t lo = 0, hi = dist.p.size();
        while (lo + 1 < hi && dist.p[lo] < 1e-9 && poisson[lo] < 1e-9) ++lo;
        while (hi > lo + 1 && dist.p[hi - 1] < 1e-9 && poisson[hi - 1] < 1e-9) --hi;
        for (std::size_t n = lo; n < hi; ++n) {
            ps.x.push_back(static_cast<double>(n));
            ps.y.push_back(dist.p[n]);
            pois.x.push_back(static_cast<double>(n));
            pois.y.push_back(poisson[n]);
        }
        ps.line = true;
        ps.points = false;
        ps.label = "steady state";
        pois.line = true;
        pois.points = false;
        pois.color = "#d62728";
        pois.label = "poisson, same mean";
        plot.series = {std::move(ps), std::move(pois)};
        write_svg_plot(out_path(prefix + tag + ".svg", opt), plot);
    }
    write_json(out_path(prefix + "_moments.json", opt), json{{"distributions", moments}}, hash);
}

void cmd_plan_snr(json raw_config, const GlobalOptions& opt) {
    const json config = apply_overrides(std::move(raw_config), opt);
    const std::string hash = config_hash(config);
    ConfigView cfg(config, "plan-snr");
    const double total = cfg.number("total_time_s");
    const double waiting = cfg.number("waiting_time_s");
    const double bin = cfg.number("bin_time_s");
    const int order = static_cast<int>(cfg.integer("order_n"));
    const auto json_path = cfg.str("output_json");
    cfg.finish();

    const auto plan = plan_snr(total, waiting, bin, order);
    write_json(out_path(json_path, opt),
               json{{"snr", plan.snr}, {"time_multiplier", plan.time_multiplier}}, hash);
}

} // namespace photoncorr::cli
