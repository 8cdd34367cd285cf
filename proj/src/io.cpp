#include "sklimit/io.hpp"

#include "sklimit/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sklimit {

namespace {

using ojson = nlohmann::ordered_json;

void emit(const ojson& v, std::string& out, int indent, int level) {
    const auto newline = [&](int lvl) {
        if (indent >= 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * lvl), ' ');
        }
    };
    switch (v.type()) {
        case ojson::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) {
                    out += ',';
                }
                first = false;
                newline(level + 1);
                out += ojson(key).dump();
                out += indent >= 0 ? ": " : ":";
                emit(item, out, indent, level + 1);
            }
            newline(level);
            out += '}';
            return;
        }
        case ojson::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (const auto& item : v) {
                flat = flat && !item.is_structured();
            }
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) {
                    out += flat && indent >= 0 ? ", " : ",";
                }
                first = false;
                if (!flat) {
                    newline(level + 1);
                }
                emit(item, out, indent, level + 1);
            }
            if (!flat) {
                newline(level);
            }
            out += ']';
            return;
        }
        case ojson::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
            return;
        }
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string dump_json(const ojson& value, int indent) {
    std::string out;
    emit(value, out, indent, 0);
    return out;
}

ojson matrix_to_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ojson model_to_json(const ModelSpec& spec) {
    ojson params = ojson::object();
    for (const auto& [name, p] : spec.params) {
        if (p.shape.empty()) {
            params[name] = p.values.at(0);
        } else if (p.shape.size() == 1) {
            params[name] = p.values;
        } else {
            ojson rows = ojson::array();
            for (std::size_t i = 0; i < p.shape[0]; ++i) {
                ojson row = ojson::array();
                for (std::size_t j = 0; j < p.shape[1]; ++j) {
                    row.push_back(p.values[i * p.shape[1] + j]);
                }
                rows.push_back(std::move(row));
            }
            params[name] = std::move(rows);
        }
    }
    ojson out = ojson::object();
    out["family"] = spec.family;
    out["mode"] = std::string(mode_name(spec.mode));
    out["params"] = std::move(params);
    return out;
}

ojson report_to_json(const ConvergenceReport& report) {
    ojson eps = ojson::array();
    ojson errors = ojson::array();
    ojson stderrs = ojson::array();
    ojson replicas = ojson::array();
    ojson fine = ojson::array();
    ojson tilde = ojson::array();
    ojson ratios = ojson::array();
    for (const EpsilonRow& row : report.rows) {
        eps.push_back(row.eps);
        errors.push_back(row.error);
        stderrs.push_back(row.std_error);
        replicas.push_back(row.replicas);
        fine.push_back(row.fine_step);
        tilde.push_back(row.mean_abs_tilde);
        ratios.push_back(row.ratio_sqrt);
    }
    ojson out = ojson::object();
    out["model"] = model_to_json(report.model);
    out["particles"] = report.particles;
    out["T"] = report.horizon;
    out["Delta"] = report.coarse_step;
    out["epsilons"] = std::move(eps);
    out["errors"] = std::move(errors);
    out["stderrs"] = std::move(stderrs);
    out["replicas"] = std::move(replicas);
    out["fine_steps"] = std::move(fine);
    out["mean_abs_S_tilde"] = std::move(tilde);
    out["ratios"] = std::move(ratios);
    if (report.fit) {
        out["slope"] = report.fit->slope;
        out["intercept"] = report.fit->intercept;
        out["r2"] = report.fit->r2;
    } else {
        out["slope"] = nullptr;
        out["intercept"] = nullptr;
        out["r2"] = nullptr;
    }
    return out;
}

std::string report_csv(const ConvergenceReport& report) {
    std::string out = "epsilon,error,stderr,ratio_sqrt\n";
    for (const EpsilonRow& row : report.rows) {
        out += format_double(row.eps) + ',' + format_double(row.error) + ',' + format_double(row.std_error) + ',' +
               format_double(row.ratio_sqrt) + '\n';
    }
    return out;
}

void write_path_csv(std::ostream& os, std::span<const PathRow> rows, bool header) {
    if (header) {
        os << "t,replica,particle,component,x_eps,v_eps,x_limit\n";
    }
    for (const PathRow& r : rows) {
        os << format_double(r.t) << ',' << r.replica << ',' << r.particle << ',' << r.component << ','
           << format_double(r.x_eps) << ',' << format_double(r.v_eps) << ',' << format_double(r.x_limit) << '\n';
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

}  // namespace sklimit
