#include "clickpath/matrix.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"

namespace clickpath::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw InvalidArgument("matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw InvalidArgument("matrix dimensions must be positive");
    if (data_.size() != rows * cols) throw ShapeMismatch("Matrix", rows, cols, data_.size(), 1);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) throw InvalidArgument("matrix dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeMismatch("Matrix", rows_, cols_, 1, r.size());
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

nlohmann::json to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()},
            {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw DataError("matrix JSON needs rows, cols, data");
    if (!j["rows"].is_number_unsigned() || !j["cols"].is_number_unsigned() || !j["data"].is_array())
        throw DataError("matrix JSON has wrongly typed fields");
    auto rows = j["rows"].get<std::size_t>();
    auto cols = j["cols"].get<std::size_t>();
    if (rows == 0 || cols == 0) throw DataError("matrix JSON dimensions must be positive");
    const auto& data = j["data"];
    if (data.size() != rows * cols) throw DataError("matrix JSON: data length != rows*cols");
    std::vector<double> values;
    values.reserve(data.size());
    for (const auto& v : data) {
        if (!v.is_number()) throw DataError("matrix JSON: non-numeric entry");
        values.push_back(v.get<double>());
    }
    Matrix m(rows, cols, std::move(values));
    if (!m.all_finite()) throw InvariantViolation("matrix JSON contains non-finite values");
    return m;
}

}  // namespace clickpath::num
