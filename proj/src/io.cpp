#include "silvar/io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace silvar::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            out.push_back(M(i, j));
        }
    }
    return out;
}

Matrix matrix_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
        throw std::runtime_error("model file: matrix entry count does not match shape");
    }
    Matrix M(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            M(i, j) = arr.at(k++).get<double>();
        }
    }
    return M;
}

Vector vector_from_json(const json& arr) {
    if (!arr.is_array()) throw std::runtime_error("model file: expected an array");
    Vector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr.at(i).get<double>();
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
}

}  // namespace

std::string serialize_model(const SilvarModel& model) {
    json doc;
    doc["mode"] = model.mode == ModelMode::autoregressive ? "ar" : "multitask";
    doc["order"] = model.order;
    doc["knots"] = matrix_to_json(model.link.knots);
    doc["values"] = matrix_to_json(model.link.values);
    doc["lipschitz_bound"] = model.link.lipschitz_bound;
    doc["shape"] = {model.A.rows(), model.A.cols()};
    doc["A"] = matrix_to_json(model.A);
    doc["L"] = matrix_to_json(model.L);
    doc["lambda_s"] = model.lambda_s;
    doc["lambda_l"] = model.lambda_l;
    return doc.dump();
}

SilvarModel deserialize_model(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
    try {
        SilvarModel model;
        const std::string mode = doc.at("mode").get<std::string>();
        if (mode == "ar") {
            model.mode = ModelMode::autoregressive;
        } else if (mode == "multitask") {
            model.mode = ModelMode::multitask;
        } else {
            throw std::runtime_error("model file: unknown mode '" + mode + "'");
        }
        model.order = doc.at("order").get<int>();
        model.link.knots = vector_from_json(doc.at("knots"));
        model.link.values = vector_from_json(doc.at("values"));
        model.link.lipschitz_bound = doc.at("lipschitz_bound").get<double>();
        const auto shape = doc.at("shape");
        const auto rows = shape.at(0).get<Eigen::Index>();
        const auto cols = shape.at(1).get<Eigen::Index>();
        model.A = matrix_from_json(doc.at("A"), rows, cols);
        model.L = matrix_from_json(doc.at("L"), rows, cols);
        model.lambda_s = doc.at("lambda_s").get<double>();
        model.lambda_l = doc.at("lambda_l").get<double>();
        if (model.link.knots.size() != model.link.values.size()) {
            throw std::runtime_error("model file: knot/value length mismatch");
        }
        return model;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const SilvarModel& model, const std::string& path) {
    write_file(path, serialize_model(model));
}

SilvarModel load_model(const std::string& path) { return deserialize_model(read_file(path)); }

std::string serialize_report(const FitReport& report) {
    json doc;
    doc["objective_trace"] = report.objective_trace;
    doc["iterations"] = report.iterations;
    doc["converged"] = report.converged;
    doc["final_step"] = report.final_step;
    doc["wall_time"] = report.wall_time;
    return doc.dump();
}

void save_report(const FitReport& report, const std::string& path) {
    write_file(path, serialize_report(report));
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvTable table;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) table.names.push_back(cell);
    }
    if (table.names.empty()) throw std::runtime_error(path + ": empty header");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(fields, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": cannot parse '" + cell + "'");
            }
        }
        if (row.size() != table.names.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(table.names.size()) +
                                     " fields, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }

    table.columns_as_rows.resize(static_cast<Eigen::Index>(table.names.size()),
                                 static_cast<Eigen::Index>(rows.size()));
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (std::size_t v = 0; v < table.names.size(); ++v) {
            table.columns_as_rows(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(s)) =
                rows[s][v];
        }
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Matrix& columns_as_rows) {
    if (static_cast<Eigen::Index>(names.size()) != columns_as_rows.rows()) {
        throw std::invalid_argument("write_csv: one name per variable row required");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i] << (i + 1 < names.size() ? ',' : '\n');
    }
    json cell;  // reuse the shortest round-trip float printer
    for (Eigen::Index s = 0; s < columns_as_rows.cols(); ++s) {
        for (Eigen::Index v = 0; v < columns_as_rows.rows(); ++v) {
            cell = columns_as_rows(v, s);
            out << cell.dump() << (v + 1 < columns_as_rows.rows() ? ',' : '\n');
        }
    }
}

Dataset dataset_from_table(const CsvTable& table) {
    std::vector<Eigen::Index> y_rows, x_rows;
    Eigen::Index time_row = -1;
    for (std::size_t i = 0; i < table.names.size(); ++i) {
        const std::string& name = table.names[i];
        if (name == "time") {
            time_row = static_cast<Eigen::Index>(i);
        } else if (!name.empty() && (name[0] == 'y' || name[0] == 'Y')) {
            y_rows.push_back(static_cast<Eigen::Index>(i));
        } else {
            x_rows.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (y_rows.empty()) {
        throw std::runtime_error("dataset needs at least one response column (name it y*)");
    }
    Dataset d;
    const Eigen::Index n = table.columns_as_rows.cols();
    d.Y.resize(static_cast<Eigen::Index>(y_rows.size()), n);
    for (std::size_t i = 0; i < y_rows.size(); ++i) d.Y.row(static_cast<Eigen::Index>(i)) = table.columns_as_rows.row(y_rows[i]);
    d.X.resize(static_cast<Eigen::Index>(x_rows.size()), n);
    for (std::size_t i = 0; i < x_rows.size(); ++i) d.X.row(static_cast<Eigen::Index>(i)) = table.columns_as_rows.row(x_rows[i]);
    if (time_row >= 0) {
        d.timestamps.resize(static_cast<std::size_t>(n));
        for (Eigen::Index s = 0; s < n; ++s) {
            d.timestamps[static_cast<std::size_t>(s)] = table.columns_as_rows(time_row, s);
        }
    }
    return d;
}

}  // namespace silvar::io
