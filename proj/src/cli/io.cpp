#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nanonmr/cli.hpp"
#include "nanonmr/error.hpp"

namespace nanonmr::cli {

using nlohmann::json;

namespace {

std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Value rounded to the 12 digits that the CSV form carries.
json json_num(double x) {
    if (!std::isfinite(x)) return num(x);
    return std::strtod(num(x).c_str(), nullptr);
}

double parse_num(const std::string& text, const std::string& context) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        throw Error(ErrorKind::Series, context + ": cannot read number \"" + text + "\"");
    return x;
}

double json_to_double(const json& v, const std::string& context) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_num(v.get<std::string>(), context);
    throw Error(ErrorKind::Series, context + ": expected a number");
}

std::string header_line(const CorrelationSeries& s) {
    return "# model=" + std::string(to_string(s.model)) + " R=" + num(s.geom.R) + " L=" + num(s.geom.L) +
           " d=" + num(s.geom.d) + " tau_ev=" + num(s.fluid.tau_ev) + " seed=" + std::to_string(s.seed);
}

std::string provenance_line(const Provenance& p) {
    return "# command=" + p.command + " config_hash=" + p.config_hash + " version=" + p.version;
}

json provenance_json(const Provenance& p) {
    return {{"command", p.command}, {"config_hash", p.config_hash}, {"version", p.version}};
}

std::map<std::string, std::string> key_values(const std::string& line) {
    std::map<std::string, std::string> out;
    std::istringstream in(line.substr(1));
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return out;
}

CorrelationSeries series_from_json(const json& doc) {
    if (doc.is_array()) {
        if (doc.size() != 1) {
            std::string first;
            for (const auto& e : doc)
                if (e.is_object() && e.contains("model") && e["model"].is_string()) {
                    if (first.empty()) first = e["model"].get<std::string>();
                    else if (first != e["model"].get<std::string>())
                        throw Error(ErrorKind::Series, "file mixes models '" + first + "' and '" +
                                                           e["model"].get<std::string>() + "'");
                }
            throw Error(ErrorKind::Series, "a series file holds exactly one series");
        }
        return series_from_json(doc[0]);
    }
    if (!doc.is_object() || !doc.contains("model") || !doc["model"].is_string())
        throw Error(ErrorKind::Series, "series object needs a \"model\" string");
    CorrelationSeries s;
    s.model = parse_model_tag(doc["model"].get<std::string>());
    const json geom = doc.value("geometry", json::object());
    s.geom = make_geometry(json_to_double(geom.value("R", json(1.0)), "R"),
                           json_to_double(geom.value("L", json(1.0)), "L"),
                           json_to_double(geom.value("d", json(1.0)), "d"));
    if (doc.contains("tau_ev")) s.fluid.tau_ev = json_to_double(doc["tau_ev"], "tau_ev");
    s.seed = doc.value("seed", std::uint64_t{0});
    for (const char* key : {"t_over_TD", "G", "err"})
        if (!doc.contains(key) || !doc[key].is_array())
            throw Error(ErrorKind::Series, std::string("series needs a \"") + key + "\" array");
    const auto& t = doc["t_over_TD"];
    const auto& g = doc["G"];
    const auto& e = doc["err"];
    if (t.size() != g.size() || t.size() != e.size()) throw Error(ErrorKind::Series, "series columns differ in length");
    for (std::size_t i = 0; i < t.size(); ++i)
        s.push(json_to_double(t[i], "t_over_TD"), json_to_double(g[i], "G"), json_to_double(e[i], "err"));
    return s;
}

CorrelationSeries series_from_csv(const std::string& text) {
    CorrelationSeries s;
    bool have_model = false, have_columns = false;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line[0] == '#') {
            const auto kv = key_values(line);
            const auto model = kv.find("model");
            if (model == kv.end()) continue;
            const ModelTag tag = parse_model_tag(model->second);
            if (have_model)
                throw Error(ErrorKind::Series, where + ": file mixes models '" + to_string(s.model) + "' and '" +
                                                   model->second + "'");
            have_model = true;
            s.model = tag;
            auto get = [&](const char* key, double fallback) {
                const auto it = kv.find(key);
                return it == kv.end() ? fallback : parse_num(it->second, where);
            };
            s.geom = make_geometry(get("R", 1.0), get("L", 1.0), get("d", 1.0));
            s.fluid.tau_ev = get("tau_ev", s.fluid.tau_ev);
            if (kv.contains("seed")) s.seed = std::stoull(kv.at("seed"));
            continue;
        }
        if (!have_columns) {
            if (line != "t_over_TD,G,err") throw Error(ErrorKind::Series, where + ": expected header t_over_TD,G,err");
            have_columns = true;
            continue;
        }
        std::istringstream row(line);
        std::string a, b, c, extra;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',') ||
            std::getline(row, extra, ','))
            throw Error(ErrorKind::Series, where + ": expected three columns");
        s.push(parse_num(a, where), parse_num(b, where), parse_num(c, where));
    }
    if (!have_model) throw Error(ErrorKind::Series, "missing '# model=' header");
    return s;
}

}  // namespace

void write_artifact(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

Provenance provenance_of(const RunConfig& config) {
    return {config.config_hash, NANONMR_VERSION, config.command};
}

std::string format_series(const CorrelationSeries& series, OutputFormat format, const Provenance& prov) {
    if (series.size() == 0) throw Error(ErrorKind::Series, "refusing to write an empty series");
    series.validate();
    if (format == OutputFormat::Json) {
        json doc;
        doc["model"] = to_string(series.model);
        doc["geometry"] = {{"R", json_num(series.geom.R)}, {"L", json_num(series.geom.L)}, {"d", json_num(series.geom.d)}};
        doc["tau_ev"] = json_num(series.fluid.tau_ev);
        doc["seed"] = series.seed;
        doc["provenance"] = provenance_json(prov);
        json t = json::array(), g = json::array(), e = json::array();
        for (std::size_t i = 0; i < series.size(); ++i) {
            t.push_back(json_num(series.t[i]));
            g.push_back(json_num(series.g[i]));
            e.push_back(json_num(series.err[i]));
        }
        doc["t_over_TD"] = std::move(t);
        doc["G"] = std::move(g);
        doc["err"] = std::move(e);
        return doc.dump(1) + "\n";
    }
    std::string out = header_line(series) + "\n" + provenance_line(prov) + "\nt_over_TD,G,err\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out += num(series.t[i]) + "," + num(series.g[i]) + "," + num(series.err[i]) + "\n";
    return out;
}

void write_series(const CorrelationSeries& series, const std::string& path, OutputFormat format,
                  const Provenance& prov) {
    const std::string text = format_series(series, format, prov);
    write_artifact(path, text);
}

CorrelationSeries parse_series(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw Error(ErrorKind::Series, "series file is empty");
    CorrelationSeries s;
    if (text[first] == '{' || text[first] == '[') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Series, std::string("malformed JSON series: ") + e.what());
        }
        s = series_from_json(doc);
    } else {
        s = series_from_csv(text);
    }
    s.validate();
    return s;
}

CorrelationSeries read_series(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_series(buf.str());
}

std::string format_table(const Table& table, OutputFormat format, const Provenance& prov) {
    if (format == OutputFormat::Json) {
        json doc;
        json meta = json::object();
        for (const auto& kv : table.meta) {
            const auto eq = kv.find('=');
            meta[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
        }
        doc["meta"] = meta;
        doc["provenance"] = provenance_json(prov);
        doc["columns"] = table.columns;
        json rows = json::array();
        for (const auto& r : table.rows) {
            json row = json::array();
            for (double x : r) row.push_back(json_num(x));
            rows.push_back(std::move(row));
        }
        doc["rows"] = std::move(rows);
        return doc.dump(1) + "\n";
    }
    std::string out = "#";
    for (const auto& kv : table.meta) out += " " + kv;
    out += "\n" + provenance_line(prov) + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
    out += "\n";
    for (const auto& r : table.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + num(r[i]);
        out += "\n";
    }
    return out;
}

}  // namespace nanonmr::cli
