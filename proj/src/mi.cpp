#include "mtfwfm/mi.hpp"

#include "mtfwfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace mtfwfm {

ContingencyCounts count(std::span<const SparseInstance> dataset, const FieldSchema& schema,
                        uint32_t num_types, size_t cell_cap) {
    const uint32_t n = static_cast<uint32_t>(schema.num_fields());
    ContingencyCounts out;
    out.num_fields = n;
    out.num_types = num_types;
    out.cell_cap = cell_cap;
    out.type_totals.assign(num_types, 0);
    out.label_totals.assign(num_types, {0, 0});
    out.pairs.assign(num_types, std::vector<PairCounts>(size_t(n) * (n - 1) / 2));

    for (const auto& inst : dataset) {
        if (inst.conv_type >= num_types)
            throw DataError("conversion type " + std::to_string(inst.conv_type) + " out of range");
        if (inst.active.size() != n) throw DataError("instance does not match schema field count");
        const uint8_t l = inst.label ? 1 : 0;
        ++out.type_totals[inst.conv_type];
        ++out.label_totals[inst.conv_type][l];
        auto& type_pairs = out.pairs[inst.conv_type];
        for (uint32_t p = 0; p + 1 < n; ++p) {
            for (uint32_t q = p + 1; q < n; ++q) {
                PairCounts& pc = type_pairs[pair_index(p, q, n)];
                if (pc.overflowed) continue;
                ++pc.cells[ContingencyCounts::cell_key(inst.active[p], inst.active[q])][l];
                if (cell_cap && pc.cells.size() > cell_cap) {
                    pc.overflowed = true;
                    pc.cells.clear();
                }
            }
        }
    }
    return out;
}

MiTable mutual_information(const ContingencyCounts& counts) {
    const uint32_t n = counts.num_fields;
    MiTable out;
    out.num_fields = n;
    out.present.assign(counts.num_types, false);
    out.mi.assign(counts.num_types, std::vector<double>(size_t(n) * n, 0.0));

    for (uint32_t t = 0; t < counts.num_types; ++t) {
        const double total = double(counts.type_totals[t]);
        if (total <= 0.0) continue;
        out.present[t] = true;
        const double p_label[2] = {double(counts.label_totals[t][0]) / total,
                                   double(counts.label_totals[t][1]) / total};
        for (uint32_t p = 0; p + 1 < n; ++p) {
            for (uint32_t q = p + 1; q < n; ++q) {
                const PairCounts& pc = counts.pairs[t][pair_index(p, q, n)];
                double mi;
                if (pc.overflowed) {
                    mi = std::numeric_limits<double>::quiet_NaN();
                } else {
                    mi = 0.0;
                    for (const auto& [key, cell] : pc.cells) {
                        (void)key;
                        const double p_joint_cell = double(cell[0] + cell[1]) / total;
                        for (int l = 0; l < 2; ++l) {
                            if (cell[l] == 0) continue; // 0 log 0 := 0
                            const double pj = double(cell[l]) / total;
                            mi += pj * std::log(pj / (p_joint_cell * p_label[l]));
                        }
                    }
                }
                out.mi[t][size_t(p) * n + q] = mi;
                out.mi[t][size_t(q) * n + p] = mi;
            }
        }
    }
    return out;
}

std::vector<FieldPair> top_k_pairs(const MiTable& mi, uint32_t type, size_t k) {
    if (type >= mi.present.size() || !mi.present[type])
        throw DataError("no samples of type " + std::to_string(type) + " in the MI table");
    std::vector<FieldPair> all;
    for (uint32_t p = 0; p + 1 < mi.num_fields; ++p)
        for (uint32_t q = p + 1; q < mi.num_fields; ++q) {
            const double v = mi.at(type, p, q);
            if (std::isnan(v)) continue;
            all.push_back({p, q, v});
        }
    std::sort(all.begin(), all.end(), [](const FieldPair& a, const FieldPair& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.p != b.p) return a.p < b.p;
        return a.q < b.q;
    });
    if (k < all.size()) all.resize(k);
    return all;
}

namespace {

std::vector<double> upper_triangle(const std::vector<double>& matrix, uint32_t n) {
    std::vector<double> v;
    v.reserve(size_t(n) * (n - 1) / 2);
    for (uint32_t p = 0; p + 1 < n; ++p)
        for (uint32_t q = p + 1; q < n; ++q) v.push_back(matrix[size_t(p) * n + q]);
    return v;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> abs_pair_weight_matrix(const ModelParams& params, uint32_t type) {
    const uint32_t n = params.config.num_fields;
    std::vector<double> m(size_t(n) * n, 0.0);
    for (uint32_t p = 0; p + 1 < n; ++p)
        for (uint32_t q = p + 1; q < n; ++q) {
            const double v = std::abs(params.pair_weight_value(type, p, q));
            m[size_t(p) * n + q] = v;
            m[size_t(q) * n + p] = v;
        }
    return m;
}

std::string format_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

double mi_pair_weight_correlation(const MiTable& mi, const ModelParams& params, uint32_t type) {
    if (params.config.kind != ModelKind::mt_fwfm)
        throw DataError("pair-weight heatmaps require an mt-fwfm model");
    if (params.config.num_fields != mi.num_fields)
        throw DataError("model and MI table disagree on field count");
    const auto u = upper_triangle(mi.mi[type], mi.num_fields);
    const auto v = upper_triangle(abs_pair_weight_matrix(params, type), mi.num_fields);
    return pearson(u, v);
}

void write_matrix_csv(const std::vector<double>& matrix, const std::vector<std::string>& field_names,
                      const std::string& path) {
    const uint32_t n = static_cast<uint32_t>(field_names.size());
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write '" + path + "'");
    os << "field";
    for (const auto& name : field_names) os << "," << name;
    os << "\n";
    for (uint32_t p = 0; p < n; ++p) {
        os << field_names[p];
        for (uint32_t q = 0; q < n; ++q) os << "," << format_cell(matrix[size_t(p) * n + q]);
        os << "\n";
    }
    if (!os) throw DataError("write to '" + path + "' failed");
}

void write_matrix_svg(const std::vector<double>& matrix, const std::vector<std::string>& field_names,
                      const std::string& title, const std::string& path) {
    const uint32_t n = static_cast<uint32_t>(field_names.size());
    const int cell = 28, margin = 110, top = 40;
    const int wpx = margin + int(n) * cell + 10;
    const int hpx = top + margin + int(n) * cell + 10;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : matrix)
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(hi > lo)) hi = lo + 1.0; // flat matrix: whole range maps to the low color

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write '" + path + "'");
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << wpx << "\" height=\"" << hpx << "\">\n";
    os << "<text x=\"" << margin << "\" y=\"24\" font-size=\"15\" font-family=\"sans-serif\">" << title
       << "</text>\n";
    for (uint32_t f = 0; f < n; ++f) {
        os << "<text x=\"" << margin - 6 << "\" y=\"" << top + margin + f * cell + cell / 2 + 4
           << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">" << field_names[f]
           << "</text>\n";
        os << "<text x=\"" << margin + f * cell + cell / 2 << "\" y=\"" << top + margin - 6
           << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"start\" transform=\"rotate(-60 "
           << margin + f * cell + cell / 2 << " " << top + margin - 6 << ")\">" << field_names[f] << "</text>\n";
    }
    for (uint32_t p = 0; p < n; ++p) {
        for (uint32_t q = 0; q < n; ++q) {
            const double v = matrix[size_t(p) * n + q];
            std::string fill;
            if (std::isnan(v)) {
                fill = "rgb(204,204,204)";
            } else {
                const double x = (v - lo) / (hi - lo); // linear scale per matrix
                const int r = int(255 + x * (8 - 255));
                const int g = int(255 + x * (48 - 255));
                const int b = int(255 + x * (107 - 255));
                fill = "rgb(" + std::to_string(r) + "," + std::to_string(g) + "," + std::to_string(b) + ")";
            }
            os << "<rect x=\"" << margin + q * cell << "\" y=\"" << top + margin + p * cell << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"" << fill << "\" stroke=\"white\"><title>"
               << field_names[p] << " x " << field_names[q] << ": " << format_cell(v) << "</title></rect>\n";
        }
    }
    os << "</svg>\n";
    if (!os) throw DataError("write to '" + path + "' failed");
}

HeatmapExport export_heatmaps(const MiTable& mi, const ModelParams& params,
                              const std::vector<std::string>& field_names,
                              const std::vector<std::string>& type_names, const std::string& dir) {
    if (params.config.kind != ModelKind::mt_fwfm)
        throw DataError("pair-weight heatmaps require an mt-fwfm model");
    if (params.config.num_fields != mi.num_fields || field_names.size() != mi.num_fields)
        throw DataError("field count mismatch between MI table, model, and field names");

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());

    HeatmapExport out;
    out.correlation_per_type.assign(mi.present.size(), std::numeric_limits<double>::quiet_NaN());
    std::ofstream corr(dir + "/correlations.json", std::ios::trunc);
    if (!corr) throw DataError("cannot write to directory '" + dir + "'");
    corr << "{\n";
    bool first = true;
    for (uint32_t t = 0; t < mi.present.size(); ++t) {
        if (!mi.present[t]) continue;
        const std::string tname = t < type_names.size() ? type_names[t] : "type" + std::to_string(t);
        const std::string mi_csv = dir + "/mi_" + tname + ".csv";
        const std::string r_csv = dir + "/r_" + tname + ".csv";
        const std::string mi_svg = dir + "/mi_" + tname + ".svg";
        const std::string r_svg = dir + "/r_" + tname + ".svg";
        const auto r_matrix = abs_pair_weight_matrix(params, t);
        write_matrix_csv(mi.mi[t], field_names, mi_csv);
        write_matrix_csv(r_matrix, field_names, r_csv);
        write_matrix_svg(mi.mi[t], field_names, "MI per field pair, " + tname, mi_svg);
        write_matrix_svg(r_matrix, field_names, "|r| per field pair, " + tname, r_svg);
        out.csv_files.push_back(mi_csv);
        out.csv_files.push_back(r_csv);
        out.svg_files.push_back(mi_svg);
        out.svg_files.push_back(r_svg);

        const double rho = mi_pair_weight_correlation(mi, params, t);
        out.correlation_per_type[t] = rho;
        if (!first) corr << ",\n";
        first = false;
        corr << "  \"" << tname << "\": " << (std::isnan(rho) ? std::string("null") : format_cell(rho));
    }
    corr << "\n}\n";
    return out;
}

} // namespace mtfwfm
