#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/rng.hpp"

namespace graphpb {

class Tape;

// Dense row-major matrix of doubles. Copies share the underlying buffer;
// operations always allocate fresh outputs. A tensor attached to a Tape gets
// a same-shape gradient buffer that backward() accumulates into.
class Tensor {
  public:
    Tensor() = default;

    Tensor(int rows, int cols)
        : rows_(rows),
          cols_(cols),
          data_(std::make_shared<std::vector<double>>(
              static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0)) {
        if (rows < 0 || cols < 0) throw ShapeMismatch("negative tensor dimension");
    }

    static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }

    static Tensor full(int rows, int cols, double value) {
        Tensor t(rows, cols);
        std::fill(t.data_->begin(), t.data_->end(), value);
        return t;
    }

    static Tensor scalar(double value) { return full(1, 1, value); }

    static Tensor identity(int n) {
        Tensor t(n, n);
        for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
        return t;
    }

    static Tensor from_data(int rows, int cols, std::vector<double> data) {
        if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw ShapeMismatch("from_data: buffer length does not match shape (" +
                                std::to_string(rows) + "x" + std::to_string(cols) + ")");
        Tensor t;
        t.rows_ = rows;
        t.cols_ = cols;
        t.data_ = std::make_shared<std::vector<double>>(std::move(data));
        return t;
    }

    static Tensor from_rows(const std::vector<std::vector<double>>& rows) {
        const int r = static_cast<int>(rows.size());
        const int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
        Tensor t(r, c);
        for (int i = 0; i < r; ++i) {
            if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c)
                throw ShapeMismatch("from_rows: ragged row lengths");
            for (int j = 0; j < c; ++j) t.at(i, j) = rows[static_cast<std::size_t>(i)]
                                                         [static_cast<std::size_t>(j)];
        }
        return t;
    }

    static Tensor random_uniform(int rows, int cols, double lo, double hi, Rng& rng) {
        Tensor t(rows, cols);
        for (double& v : *t.data_) v = rng.uniform(lo, hi);
        return t;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const {
        return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
    }

    double at(int r, int c) const {
        return (*data_)[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                        static_cast<std::size_t>(c)];
    }
    double& at(int r, int c) {
        return (*data_)[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                        static_cast<std::size_t>(c)];
    }

    // Value of a 1x1 tensor.
    double value() const {
        if (rows_ != 1 || cols_ != 1)
            throw ShapeMismatch("value() needs a 1x1 tensor, got " + shape_string());
        return (*data_)[0];
    }

    const std::vector<double>& values() const { return *data_; }
    std::vector<double>& values_mutable() { return *data_; }

    bool has_grad() const { return grad_ != nullptr; }
    const std::vector<double>& grad() const {
        if (!grad_) throw DetachedTensor("tensor has no gradient buffer");
        return *grad_;
    }
    Tensor grad_tensor() const { return from_data(rows_, cols_, grad()); }

    std::shared_ptr<std::vector<double>> data_handle() const { return data_; }
    std::shared_ptr<std::vector<double>> grad_handle() const { return grad_; }

    bool tracked() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }

    // Joins the tape, allocating (or zeroing) the gradient buffer. An
    // existing buffer is reused so copies that share it stay in sync.
    Tensor& attach(Tape& tape) {
        tape_ = &tape;
        if (grad_)
            std::fill(grad_->begin(), grad_->end(), 0.0);
        else
            grad_ = std::make_shared<std::vector<double>>(size(), 0.0);
        return *this;
    }

    Tensor& detach() {
        tape_ = nullptr;
        return *this;
    }

    Tensor clone() const {
        Tensor t;
        t.rows_ = rows_;
        t.cols_ = cols_;
        t.data_ = std::make_shared<std::vector<double>>(*data_);
        return t;
    }

    bool all_finite() const {
        for (double v : *data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::shared_ptr<std::vector<double>> data_;
    std::shared_ptr<std::vector<double>> grad_;
    Tape* tape_ = nullptr;
};

// Records one closure per primitive op, in execution order (which is a
// topological order of the value graph). backward() runs them once, in
// reverse. The closures keep the forward buffers alive via shared_ptr.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(std::function<void()> backward_fn) {
        ops_.push_back(std::move(backward_fn));
    }

    std::size_t size() const { return ops_.size(); }

    // Seeds d(loss)/d(loss) = 1 and sweeps the recorded ops in reverse,
    // accumulating into every attached tensor's gradient buffer. One-shot:
    // gradients are sums, so a second sweep would double them.
    void backward(const Tensor& loss) {
        if (loss.rows() != 1 || loss.cols() != 1)
            throw NotScalarLoss("loss must be 1x1, got " + loss.shape_string());
        if (!loss.tracked() || loss.tape() != this)
            throw DetachedTensor("loss is not recorded on this tape");
        if (ran_)
            throw Error("backward() already ran on this tape");
        ran_ = true;
        (*loss.grad_handle())[0] = 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    // The tape of an op's output: whichever input is tracked. Mixing two
    // different tapes in one op is a usage error.
    static Tape* join(const Tensor& a, const Tensor& b) {
        if (a.tracked() && b.tracked() && a.tape() != b.tape())
            throw Error("operands recorded on different tapes");
        return a.tracked() ? a.tape() : b.tape();
    }

  private:
    std::vector<std::function<void()>> ops_;
    bool ran_ = false;
};

namespace detail {

inline ShapeMismatch shape_error(const char* op, const Tensor& a, const Tensor& b) {
    return ShapeMismatch(std::string(op) + ": incompatible shapes " + a.shape_string() +
                         " and " + b.shape_string());
}

inline std::size_t idx(int r, int c, int cols) {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(c);
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw detail::shape_error("matmul", a, b);
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out(m, n);
    {
        const auto& av = a.values();
        const auto& bv = b.values();
        auto& ov = out.values_mutable();
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                const double aip = av[detail::idx(i, p, k)];
                if (aip == 0.0) continue;
                for (int j = 0; j < n; ++j)
                    ov[detail::idx(i, j, n)] += aip * bv[detail::idx(p, j, n)];
            }
    }
    if (Tape* tape = Tape::join(a, b)) {
        out.attach(*tape);
        auto pa = a.data_handle(), pb = b.data_handle();
        auto ga = a.grad_handle(), gb = b.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (ga)
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        double s = 0;
                        for (int j = 0; j < n; ++j)
                            s += (*go)[detail::idx(i, j, n)] * (*pb)[detail::idx(p, j, n)];
                        (*ga)[detail::idx(i, p, k)] += s;
                    }
            if (gb)
                for (int p = 0; p < k; ++p)
                    for (int j = 0; j < n; ++j) {
                        double s = 0;
                        for (int i = 0; i < m; ++i)
                            s += (*pa)[detail::idx(i, p, k)] * (*go)[detail::idx(i, j, n)];
                        (*gb)[detail::idx(p, j, n)] += s;
                    }
        });
    }
    return out;
}

// Elementwise sum; also accepts a 1xN second operand broadcast over rows.
inline Tensor add(const Tensor& a, const Tensor& b) {
    const bool broadcast = b.rows() == 1 && a.rows() != 1;
    if (a.cols() != b.cols() || (!broadcast && a.rows() != b.rows()))
        throw detail::shape_error("add", a, b);
    const int m = a.rows(), n = a.cols();
    Tensor out(m, n);
    {
        const auto& av = a.values();
        const auto& bv = b.values();
        auto& ov = out.values_mutable();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                ov[detail::idx(i, j, n)] =
                    av[detail::idx(i, j, n)] + bv[detail::idx(broadcast ? 0 : i, j, n)];
    }
    if (Tape* tape = Tape::join(a, b)) {
        out.attach(*tape);
        auto ga = a.grad_handle(), gb = b.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (ga)
                for (std::size_t i = 0; i < go->size(); ++i) (*ga)[i] += (*go)[i];
            if (gb) {
                if (broadcast) {
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j)
                            (*gb)[static_cast<std::size_t>(j)] += (*go)[detail::idx(i, j, n)];
                } else {
                    for (std::size_t i = 0; i < go->size(); ++i) (*gb)[i] += (*go)[i];
                }
            }
        });
    }
    return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw detail::shape_error("hadamard", a, b);
    Tensor out(a.rows(), a.cols());
    {
        const auto& av = a.values();
        const auto& bv = b.values();
        auto& ov = out.values_mutable();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    }
    if (Tape* tape = Tape::join(a, b)) {
        out.attach(*tape);
        auto pa = a.data_handle(), pb = b.data_handle();
        auto ga = a.grad_handle(), gb = b.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            for (std::size_t i = 0; i < go->size(); ++i) {
                if (ga) (*ga)[i] += (*go)[i] * (*pb)[i];
                if (gb) (*gb)[i] += (*go)[i] * (*pa)[i];
            }
        });
    }
    return out;
}

// alpha * t + beta, elementwise.
inline Tensor affine(const Tensor& t, double alpha, double beta) {
    Tensor out(t.rows(), t.cols());
    {
        const auto& tv = t.values();
        auto& ov = out.values_mutable();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = alpha * tv[i] + beta;
    }
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (std::size_t i = 0; i < go->size(); ++i) (*gt)[i] += alpha * (*go)[i];
        });
    }
    return out;
}

inline Tensor scale(const Tensor& t, double alpha) { return affine(t, alpha, 0.0); }

namespace detail {

template <class Fwd, class DFromY>
Tensor unary_from_output(const Tensor& t, Fwd fwd, DFromY dfy) {
    Tensor out(t.rows(), t.cols());
    {
        const auto& tv = t.values();
        auto& ov = out.values_mutable();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(tv[i]);
    }
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto po = out.data_handle();
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (std::size_t i = 0; i < go->size(); ++i)
                    (*gt)[i] += (*go)[i] * dfy((*po)[i]);
        });
    }
    return out;
}

}  // namespace detail

inline Tensor sigmoid(const Tensor& t) {
    return detail::unary_from_output(
        t, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double y) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& t) {
    return detail::unary_from_output(t, [](double x) { return std::tanh(x); },
                                     [](double y) { return 1.0 - y * y; });
}

inline Tensor relu(const Tensor& t) {
    Tensor out(t.rows(), t.cols());
    {
        const auto& tv = t.values();
        auto& ov = out.values_mutable();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = tv[i] > 0.0 ? tv[i] : 0.0;
    }
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto pt = t.data_handle();
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (std::size_t i = 0; i < go->size(); ++i)
                    if ((*pt)[i] > 0.0) (*gt)[i] += (*go)[i];
        });
    }
    return out;
}

// Softmax independently over each row, max-shifted for stability.
inline Tensor softmax_rows(const Tensor& t) {
    const int m = t.rows(), n = t.cols();
    if (n == 0) throw ShapeMismatch("softmax_rows: empty rows");
    Tensor out(m, n);
    {
        const auto& tv = t.values();
        auto& ov = out.values_mutable();
        for (int i = 0; i < m; ++i) {
            double mx = tv[detail::idx(i, 0, n)];
            for (int j = 1; j < n; ++j) mx = std::max(mx, tv[detail::idx(i, j, n)]);
            double sum = 0;
            for (int j = 0; j < n; ++j) {
                const double e = std::exp(tv[detail::idx(i, j, n)] - mx);
                ov[detail::idx(i, j, n)] = e;
                sum += e;
            }
            for (int j = 0; j < n; ++j) ov[detail::idx(i, j, n)] /= sum;
        }
    }
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto po = out.data_handle();
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (!gt) return;
            for (int i = 0; i < m; ++i) {
                double dot = 0;
                for (int j = 0; j < n; ++j)
                    dot += (*go)[detail::idx(i, j, n)] * (*po)[detail::idx(i, j, n)];
                for (int j = 0; j < n; ++j)
                    (*gt)[detail::idx(i, j, n)] +=
                        (*po)[detail::idx(i, j, n)] * ((*go)[detail::idx(i, j, n)] - dot);
            }
        });
    }
    return out;
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw detail::shape_error("concat_cols", a, b);
    const int m = a.rows(), ca = a.cols(), cb = b.cols();
    Tensor out(m, ca + cb);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ca; ++j) out.at(i, j) = a.at(i, j);
        for (int j = 0; j < cb; ++j) out.at(i, ca + j) = b.at(i, j);
    }
    if (Tape* tape = Tape::join(a, b)) {
        out.attach(*tape);
        auto ga = a.grad_handle(), gb = b.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            for (int i = 0; i < m; ++i) {
                if (ga)
                    for (int j = 0; j < ca; ++j)
                        (*ga)[detail::idx(i, j, ca)] += (*go)[detail::idx(i, j, ca + cb)];
                if (gb)
                    for (int j = 0; j < cb; ++j)
                        (*gb)[detail::idx(i, j, cb)] +=
                            (*go)[detail::idx(i, ca + j, ca + cb)];
            }
        });
    }
    return out;
}

inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) throw detail::shape_error("concat_rows", a, b);
    const int ra = a.rows(), rb = b.rows(), n = a.cols();
    Tensor out(ra + rb, n);
    for (int i = 0; i < ra; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = a.at(i, j);
    for (int i = 0; i < rb; ++i)
        for (int j = 0; j < n; ++j) out.at(ra + i, j) = b.at(i, j);
    if (Tape* tape = Tape::join(a, b)) {
        out.attach(*tape);
        auto ga = a.grad_handle(), gb = b.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (ga)
                for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += (*go)[i];
            if (gb)
                for (std::size_t i = 0; i < gb->size(); ++i)
                    (*gb)[i] += (*go)[static_cast<std::size_t>(ra) *
                                          static_cast<std::size_t>(n) +
                                      i];
        });
    }
    return out;
}

inline Tensor transpose(const Tensor& t) {
    const int m = t.rows(), n = t.cols();
    Tensor out(n, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(j, i) = t.at(i, j);
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        (*gt)[detail::idx(i, j, n)] += (*go)[detail::idx(j, i, m)];
        });
    }
    return out;
}

// Copy of rows [r0, r1) x cols [c0, c1).
inline Tensor slice(const Tensor& t, int r0, int r1, int c0, int c1) {
    if (r0 < 0 || r1 > t.rows() || c0 < 0 || c1 > t.cols() || r0 >= r1 || c0 >= c1)
        throw ShapeMismatch("slice: bad range [" + std::to_string(r0) + "," +
                            std::to_string(r1) + ")x[" + std::to_string(c0) + "," +
                            std::to_string(c1) + ") of " + t.shape_string());
    const int m = r1 - r0, n = c1 - c0, tc = t.cols();
    Tensor out(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = t.at(r0 + i, c0 + j);
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        (*gt)[detail::idx(r0 + i, c0 + j, tc)] += (*go)[detail::idx(i, j, n)];
        });
    }
    return out;
}

inline Tensor slice_rows(const Tensor& t, int r0, int r1) {
    return slice(t, r0, r1, 0, t.cols());
}

inline Tensor sum_all(const Tensor& t) {
    Tensor out(1, 1);
    {
        const auto& tv = t.values();
        double s = 0;
        for (double v : tv) s += v;
        out.at(0, 0) = s;
    }
    if (Tape* tape = t.tape()) {
        out.attach(*tape);
        auto gt = t.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            if (gt)
                for (std::size_t i = 0; i < gt->size(); ++i) (*gt)[i] += (*go)[0];
        });
    }
    return out;
}

// Mean of squared differences over all entries; 1x1 result.
inline Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw detail::shape_error("mse_loss", pred, target);
    const double n = static_cast<double>(pred.size());
    Tensor out(1, 1);
    {
        const auto& pv = pred.values();
        const auto& tv = target.values();
        double s = 0;
        for (std::size_t i = 0; i < pv.size(); ++i) {
            const double d = pv[i] - tv[i];
            s += d * d;
        }
        out.at(0, 0) = s / n;
    }
    if (Tape* tape = Tape::join(pred, target)) {
        out.attach(*tape);
        auto pp = pred.data_handle(), pt = target.data_handle();
        auto gp = pred.grad_handle(), gt = target.grad_handle(), go = out.grad_handle();
        tape->record([=] {
            const double g = (*go)[0] * 2.0 / n;
            for (std::size_t i = 0; i < pp->size(); ++i) {
                const double d = (*pp)[i] - (*pt)[i];
                if (gp) (*gp)[i] += g * d;
                if (gt) (*gt)[i] -= g * d;
            }
        });
    }
    return out;
}

// Largest absolute entry difference; test and diagnostic helper.
inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw detail::shape_error("max_abs_diff", a, b);
    double worst = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

inline double frobenius_norm(const Tensor& t) {
    double s = 0;
    for (double v : t.values()) s += v * v;
    return std::sqrt(s);
}

}  // namespace graphpb
