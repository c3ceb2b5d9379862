#include "metaug/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metaug/error.hpp"

namespace metaug {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string metrics_csv_header() {
    return "dataset,method,ir,fold,seed,auc_pr,p_at_r075,p_at_r050,p_at_r025,f1,mcc,kappa,"
           "accuracy,tp,fp,tn,fn\n";
}

std::string metrics_csv_row(const MetricReport& r) {
    std::ostringstream out;
    out << r.dataset << ',' << r.method << ',' << fmt(r.ir) << ',' << r.fold << ',' << r.seed
        << ',' << fmt(r.auc_pr) << ',' << fmt(r.precision_at_075) << ','
        << fmt(r.precision_at_050) << ',' << fmt(r.precision_at_025) << ',' << fmt(r.at_half.f1)
        << ',' << fmt(r.at_half.mcc) << ',' << fmt(r.at_half.kappa) << ','
        << fmt(r.at_half.accuracy) << ',' << r.at_half.counts.tp << ',' << r.at_half.counts.fp
        << ',' << r.at_half.counts.tn << ',' << r.at_half.counts.fn << '\n';
    return out.str();
}

std::string pr_curve_csv(const PrCurve& curve) {
    std::ostringstream out;
    out << "threshold,recall,precision\n";
    for (const PrPoint& p : curve.points)
        out << fmt(p.threshold) << ',' << fmt(p.recall) << ',' << fmt(p.precision) << '\n';
    return out.str();
}

std::string ap_table_csv(const std::vector<MetricReport>& aggregates,
                         const std::vector<std::string>& method_order) {
    std::map<std::string, std::map<std::string, double>> by_dataset;
    std::vector<std::string> dataset_order;
    for (const MetricReport& r : aggregates) {
        if (!by_dataset.count(r.dataset)) dataset_order.push_back(r.dataset);
        by_dataset[r.dataset][r.method] = r.auc_pr;
    }
    std::ostringstream out;
    out << "dataset";
    for (const std::string& m : method_order) out << ',' << m;
    out << '\n';
    for (const std::string& d : dataset_order) {
        out << d;
        for (const std::string& m : method_order) {
            out << ',';
            auto it = by_dataset[d].find(m);
            if (it != by_dataset[d].end()) out << fmt(it->second);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

struct Bounds {
    double lo = 0.0, hi = 1.0;
    void update(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label) {
    const double width = 640, height = 420;
    const double ml = 60, mr = 140, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    Bounds bx, by;
    bool any = false;
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!any) {
                bx.lo = bx.hi = s.x[i];
                by.lo = by.hi = s.y[i];
                any = true;
            } else {
                bx.update(s.x[i]);
                by.update(s.y[i]);
            }
        }
    if (!any) {
        bx = {0, 1};
        by = {0, 1};
    }
    if (bx.hi == bx.lo) bx.hi = bx.lo + 1;
    if (by.hi == by.lo) by.hi = by.lo + 1;

    auto px = [&](double v) { return ml + (v - bx.lo) / (bx.hi - bx.lo) * pw; };
    auto py = [&](double v) { return mt + ph - (v - by.lo) / (by.hi - by.lo) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(title) << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = bx.lo + (bx.hi - bx.lo) * tick / 4.0;
        const double fy = by.lo + (by.hi - by.lo) * tick / 4.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << mt + ph / 2
        << ")\">" << escape_xml(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 7];
        std::ostringstream pts;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
            pts << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 34
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
            << escape_xml(series[s].label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw Error("cannot create directory " + path + ": " + ec.message());
}

void emit_reports(const ExperimentConfig& cfg, const ExperimentOutcome& outcome) {
    ensure_directory(cfg.out_dir);

    std::string metrics = metrics_csv_header();
    for (const RunResult& r : outcome.runs) metrics += metrics_csv_row(r.report);
    write_text_file(cfg.out_dir + "/metrics.csv", metrics);

    std::string agg = metrics_csv_header();
    for (const MetricReport& r : outcome.aggregates) agg += metrics_csv_row(r);
    write_text_file(cfg.out_dir + "/aggregate.csv", agg);

    std::vector<std::string> method_order;
    for (Method m : cfg.methods) method_order.push_back(method_name(m));
    write_text_file(cfg.out_dir + "/ap_table.csv", ap_table_csv(outcome.aggregates, method_order));

    std::vector<PlotSeries> pr_series;
    for (const RunResult& r : outcome.runs) {
        const std::string tag = r.report.method + "_fold" + std::to_string(r.report.fold);
        write_text_file(cfg.out_dir + "/pr_" + tag + ".csv", pr_curve_csv(r.curve));
        if (r.report.fold <= 0) {
            PlotSeries s;
            s.label = r.report.method;
            for (const PrPoint& p : r.curve.points) {
                s.x.push_back(p.recall);
                s.y.push_back(p.precision);
            }
            pr_series.push_back(std::move(s));
        }
        if (r.has_meta) {
            write_text_file(cfg.out_dir + "/convergence_" + tag + ".csv",
                            convergence_csv(r.meta_state));
        }
    }
    if (!pr_series.empty())
        write_text_file(cfg.out_dir + "/pr_curves.svg",
                        svg_line_plot(pr_series, cfg.name + " precision-recall (fold 0)",
                                      "recall", "precision"));

    for (const RunResult& r : outcome.runs) {
        if (!r.has_meta || r.report.fold > 0) continue;
        std::vector<PlotSeries> conv;
        PlotSeries v{"valid", {}, {}}, t{"train", {}, {}}, z{"synthetic", {}, {}};
        for (std::size_t e = 0; e < r.meta_state.epochs_run; ++e) {
            v.x.push_back(static_cast<double>(e));
            v.y.push_back(r.meta_state.valid_loss[e]);
            t.x.push_back(static_cast<double>(e));
            t.y.push_back(r.meta_state.train_loss[e]);
            z.x.push_back(static_cast<double>(e));
            z.y.push_back(r.meta_state.synth_loss[e]);
        }
        conv.push_back(std::move(v));
        conv.push_back(std::move(t));
        conv.push_back(std::move(z));
        write_text_file(cfg.out_dir + "/convergence.svg",
                        svg_line_plot(conv, cfg.name + " meta convergence", "epoch", "loss"));
        break;
    }
}

std::string checkpoint_json(const MetaState& state) {
    nlohmann::json j;
    j["params"] = nlohmann::json::parse(params_to_json(state.theta));
    j["epoch"] = state.epochs_run;
    j["synthetic"] = {{"shape", state.synth.Z.shape},
                      {"values", state.synth.Z.values},
                      {"origin", state.synth.origin}};
    j["history"] = {{"valid_loss", state.valid_loss},
                    {"synth_loss", state.synth_loss},
                    {"train_loss", state.train_loss},
                    {"z_shift", state.z_shift}};
    return j.dump(2);
}

MetaState checkpoint_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    MetaState s;
    s.theta = params_from_json(j.at("params").dump());
    s.epochs_run = j.at("epoch").get<std::size_t>();
    s.synth.Z.shape = j.at("synthetic").at("shape").get<std::vector<std::size_t>>();
    s.synth.Z.values = j.at("synthetic").at("values").get<std::vector<double>>();
    s.synth.origin = j.at("synthetic").at("origin").get<std::vector<std::size_t>>();
    s.valid_loss = j.at("history").at("valid_loss").get<std::vector<double>>();
    s.synth_loss = j.at("history").at("synth_loss").get<std::vector<double>>();
    s.train_loss = j.at("history").at("train_loss").get<std::vector<double>>();
    s.z_shift = j.at("history").at("z_shift").get<std::vector<double>>();
    return s;
}

std::string synthetic_set_csv(const SyntheticSet& initial, const SyntheticSet& final_set) {
    std::ostringstream out;
    out << "stage,origin";
    for (std::size_t c = 0; c < initial.Z.cols(); ++c) out << ",z" << c;
    out << '\n';
    auto rows = [&](const SyntheticSet& s, const char* stage) {
        for (std::size_t r = 0; r < s.Z.rows(); ++r) {
            out << stage << ',' << (r < s.origin.size() ? s.origin[r] : 0);
            for (std::size_t c = 0; c < s.Z.cols(); ++c) out << ',' << fmt(s.Z.at(r, c));
            out << '\n';
        }
    };
    rows(initial, "initial");
    rows(final_set, "final");
    return out.str();
}

}  // namespace metaug
