#include "seepline/nn.hpp"

#include <cmath>
#include <utility>

#include "seepline/errors.hpp"

namespace seepline::nn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::VectorXd sigmoid_v(const Eigen::VectorXd& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

// Fills row-major so the draw order is independent of Eigen's storage order.
void glorot_fill(Eigen::MatrixXd& w, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = rng.uniform(-bound, bound);
        }
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

class Conv1d final : public Layer {
public:
    Conv1d(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), cin_(in_channels) {
        const Eigen::Index cout = spec_.units;
        w_ = Eigen::MatrixXd::Zero(cout, spec_.kernel * cin_);
        b_ = Eigen::MatrixXd::Zero(cout, 1);
        dw_ = Eigen::MatrixXd::Zero(w_.rows(), w_.cols());
        db_ = Eigen::MatrixXd::Zero(b_.rows(), 1);
    }

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {in_time, spec_.units};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != cin_) {
            throw ShapeError("conv1d expects " + std::to_string(cin_) + " channels, got " +
                             std::to_string(x.cols()));
        }
        const Eigen::Index t_len = x.rows();
        const Eigen::Index k = spec_.kernel;
        const Eigen::Index pad = k / 2;
        // im2col with zero borders: cols_(t, j*cin_+c) = x(t+j-pad, c).
        cols_ = Eigen::MatrixXd::Zero(t_len, k * cin_);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::Index lo = std::max<Eigen::Index>(0, pad - j);
            const Eigen::Index hi = std::min(t_len, t_len + pad - j);
            if (lo >= hi) continue;
            cols_.block(lo, j * cin_, hi - lo, cin_) = x.block(lo + j - pad, 0, hi - lo, cin_);
        }
        Eigen::MatrixXd y = cols_ * w_.transpose();
        y.rowwise() += b_.col(0).transpose();
        return y;
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        const Eigen::Index t_len = cols_.rows();
        if (dy.rows() != t_len || dy.cols() != spec_.units) {
            throw ShapeError("conv1d backward shape mismatch");
        }
        dw_ += dy.transpose() * cols_;
        db_.col(0) += dy.colwise().sum().transpose();
        const Eigen::MatrixXd dcols = dy * w_;
        const Eigen::Index k = spec_.kernel;
        const Eigen::Index pad = k / 2;
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(t_len, cin_);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::Index lo = std::max<Eigen::Index>(0, pad - j);
            const Eigen::Index hi = std::min(t_len, t_len + pad - j);
            if (lo >= hi) continue;
            dx.block(lo + j - pad, 0, hi - lo, cin_) += dcols.block(lo, j * cin_, hi - lo, cin_);
        }
        return dx;
    }

    std::vector<Eigen::MatrixXd*> params() override { return {&w_, &b_}; }
    std::vector<Eigen::MatrixXd*> grads() override { return {&dw_, &db_}; }
    std::vector<std::string> param_names() const override { return {"W", "b"}; }

    void init_params(Rng& rng) override {
        glorot_fill(w_, spec_.kernel * cin_, spec_.kernel * spec_.units, rng);
        b_.setZero();
    }

private:
    LayerSpec spec_;
    Eigen::Index cin_;
    Eigen::MatrixXd w_, b_, dw_, db_;
    Eigen::MatrixXd cols_;
};

class MaxPool1d final : public Layer {
public:
    MaxPool1d(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), cin_(in_channels) {}

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {(in_time + spec_.pool - 1) / spec_.pool, cin_};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != cin_) throw ShapeError("maxpool channel mismatch");
        in_time_ = x.rows();
        const Eigen::Index s = spec_.pool;
        const Eigen::Index out_t = (in_time_ + s - 1) / s;
        Eigen::MatrixXd y(out_t, cin_);
        arg_.resize(out_t, cin_);
        for (Eigen::Index w = 0; w < out_t; ++w) {
            const Eigen::Index lo = w * s;
            const Eigen::Index hi = std::min(lo + s, in_time_);
            for (Eigen::Index c = 0; c < cin_; ++c) {
                Eigen::Index best = lo;
                for (Eigen::Index t = lo + 1; t < hi; ++t) {
                    if (x(t, c) > x(best, c)) best = t;  // ties keep the earliest
                }
                arg_(w, c) = best;
                y(w, c) = x(best, c);
            }
        }
        return y;
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        if (dy.rows() != arg_.rows() || dy.cols() != cin_) {
            throw ShapeError("maxpool backward shape mismatch");
        }
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(in_time_, cin_);
        for (Eigen::Index w = 0; w < dy.rows(); ++w) {
            for (Eigen::Index c = 0; c < cin_; ++c) {
                dx(arg_(w, c), c) += dy(w, c);
            }
        }
        return dx;
    }

    void init_params(Rng&) override {}

private:
    LayerSpec spec_;
    Eigen::Index cin_;
    Eigen::Index in_time_ = 0;
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> arg_;
};

class Flatten final : public Layer {
public:
    Flatten(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), cin_(in_channels) {}

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {1, in_time * cin_};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != cin_) throw ShapeError("flatten channel mismatch");
        in_time_ = x.rows();
        Eigen::MatrixXd y(1, in_time_ * cin_);
        for (Eigen::Index t = 0; t < in_time_; ++t) {
            y.block(0, t * cin_, 1, cin_) = x.row(t);
        }
        return y;
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        if (dy.rows() != 1 || dy.cols() != in_time_ * cin_) {
            throw ShapeError("flatten backward shape mismatch");
        }
        Eigen::MatrixXd dx(in_time_, cin_);
        for (Eigen::Index t = 0; t < in_time_; ++t) {
            dx.row(t) = dy.block(0, t * cin_, 1, cin_);
        }
        return dx;
    }

    void init_params(Rng&) override {}

private:
    LayerSpec spec_;
    Eigen::Index cin_;
    Eigen::Index in_time_ = 0;
};

class Dense final : public Layer {
public:
    Dense(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), cin_(in_channels) {
        w_ = Eigen::MatrixXd::Zero(spec_.units, cin_);
        b_ = Eigen::MatrixXd::Zero(spec_.units, 1);
        dw_ = Eigen::MatrixXd::Zero(w_.rows(), w_.cols());
        db_ = Eigen::MatrixXd::Zero(b_.rows(), 1);
    }

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {in_time, spec_.units};
    }

    // Applied per row, so a dense layer after flatten is the ordinary case
    // and a dense layer on a sequence acts time-distributed.
    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != cin_) throw ShapeError("dense channel mismatch");
        x_ = x;
        Eigen::MatrixXd z = x * w_.transpose();
        z.rowwise() += b_.col(0).transpose();
        switch (spec_.activation) {
            case Activation::linear: y_ = z; break;
            case Activation::relu: y_ = z.cwiseMax(0.0); break;
            case Activation::tanh: y_ = z.array().tanh(); break;
            case Activation::sigmoid:
                y_ = z.unaryExpr([](double v) { return sigmoid(v); });
                break;
        }
        return y_;
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        if (dy.rows() != y_.rows() || dy.cols() != y_.cols()) {
            throw ShapeError("dense backward shape mismatch");
        }
        Eigen::MatrixXd dz;
        switch (spec_.activation) {
            case Activation::linear: dz = dy; break;
            case Activation::relu:
                dz = dy.cwiseProduct((y_.array() > 0.0).cast<double>().matrix());
                break;
            case Activation::tanh:
                dz = dy.cwiseProduct((1.0 - y_.array().square()).matrix());
                break;
            case Activation::sigmoid:
                dz = dy.cwiseProduct((y_.array() * (1.0 - y_.array())).matrix());
                break;
        }
        dw_ += dz.transpose() * x_;
        db_.col(0) += dz.colwise().sum().transpose();
        return dz * w_;
    }

    std::vector<Eigen::MatrixXd*> params() override { return {&w_, &b_}; }
    std::vector<Eigen::MatrixXd*> grads() override { return {&dw_, &db_}; }
    std::vector<std::string> param_names() const override { return {"W", "b"}; }

    void init_params(Rng& rng) override {
        glorot_fill(w_, cin_, spec_.units, rng);
        b_.setZero();
    }

private:
    LayerSpec spec_;
    Eigen::Index cin_;
    Eigen::MatrixXd w_, b_, dw_, db_;
    Eigen::MatrixXd x_, y_;
};

// Gate recurrences with h_0 = c_0 = 0:
//   i = sigma(V_i x + W_i h' + b_i)      f = sigma(V_f x + W_f h' + b_f)
//   g = tanh(V_c x + W_c h' + b_c)       c = f.c' + i.g
//   o = sigma(V_o x + W_o h' + b_o)      h = o.tanh(c)
class Lstm final : public Layer {
public:
    Lstm(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), din_(in_channels) {
        const Eigen::Index h = spec_.units;
        for (auto* m : {&vi_, &vf_, &vc_, &vo_}) *m = Eigen::MatrixXd::Zero(h, din_);
        for (auto* m : {&wi_, &wf_, &wc_, &wo_}) *m = Eigen::MatrixXd::Zero(h, h);
        for (auto* m : {&bi_, &bf_, &bc_, &bo_}) *m = Eigen::MatrixXd::Zero(h, 1);
        zero_grad_storage();
    }

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {in_time, spec_.units};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != din_) throw ShapeError("lstm input width mismatch");
        const Eigen::Index t_len = x.rows();
        const Eigen::Index h = spec_.units;
        x_ = x;
        h_ = Eigen::MatrixXd::Zero(t_len + 1, h);  // row t+1 holds h_t
        c_ = Eigen::MatrixXd::Zero(t_len + 1, h);
        ig_.resize(t_len, h);
        fg_.resize(t_len, h);
        gg_.resize(t_len, h);
        og_.resize(t_len, h);
        tc_.resize(t_len, h);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const Eigen::VectorXd xt = x.row(t).transpose();
            const Eigen::VectorXd hp = h_.row(t).transpose();
            const Eigen::VectorXd i = sigmoid_v(vi_ * xt + wi_ * hp + bi_.col(0));
            const Eigen::VectorXd f = sigmoid_v(vf_ * xt + wf_ * hp + bf_.col(0));
            const Eigen::VectorXd g = (vc_ * xt + wc_ * hp + bc_.col(0)).array().tanh();
            const Eigen::VectorXd o = sigmoid_v(vo_ * xt + wo_ * hp + bo_.col(0));
            const Eigen::VectorXd c =
                f.cwiseProduct(c_.row(t).transpose()) + i.cwiseProduct(g);
            const Eigen::VectorXd tc = c.array().tanh();
            ig_.row(t) = i.transpose();
            fg_.row(t) = f.transpose();
            gg_.row(t) = g.transpose();
            og_.row(t) = o.transpose();
            tc_.row(t) = tc.transpose();
            c_.row(t + 1) = c.transpose();
            h_.row(t + 1) = o.cwiseProduct(tc).transpose();
        }
        return h_.bottomRows(t_len);
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        const Eigen::Index t_len = x_.rows();
        const Eigen::Index h = spec_.units;
        if (dy.rows() != t_len || dy.cols() != h) throw ShapeError("lstm backward shape mismatch");
        Eigen::MatrixXd dx(t_len, din_);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
        for (Eigen::Index t = t_len - 1; t >= 0; --t) {
            const Eigen::VectorXd xt = x_.row(t).transpose();
            const Eigen::VectorXd hp = h_.row(t).transpose();
            const Eigen::VectorXd cp = c_.row(t).transpose();
            const Eigen::ArrayXd i = ig_.row(t).transpose().array();
            const Eigen::ArrayXd f = fg_.row(t).transpose().array();
            const Eigen::ArrayXd g = gg_.row(t).transpose().array();
            const Eigen::ArrayXd o = og_.row(t).transpose().array();
            const Eigen::ArrayXd tc = tc_.row(t).transpose().array();

            const Eigen::ArrayXd dh = dy.row(t).transpose().array() + dh_next.array();
            const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
            const Eigen::VectorXd dai = (dc * g * i * (1.0 - i)).matrix();
            const Eigen::VectorXd daf = (dc * cp.array() * f * (1.0 - f)).matrix();
            const Eigen::VectorXd dag = (dc * i * (1.0 - g.square())).matrix();
            const Eigen::VectorXd dao = (dh * tc * o * (1.0 - o)).matrix();

            dvi_ += dai * xt.transpose();
            dvf_ += daf * xt.transpose();
            dvc_ += dag * xt.transpose();
            dvo_ += dao * xt.transpose();
            dwi_ += dai * hp.transpose();
            dwf_ += daf * hp.transpose();
            dwc_ += dag * hp.transpose();
            dwo_ += dao * hp.transpose();
            dbi_.col(0) += dai;
            dbf_.col(0) += daf;
            dbc_.col(0) += dag;
            dbo_.col(0) += dao;

            dx.row(t) = (vi_.transpose() * dai + vf_.transpose() * daf +
                         vc_.transpose() * dag + vo_.transpose() * dao)
                            .transpose();
            dh_next = wi_.transpose() * dai + wf_.transpose() * daf + wc_.transpose() * dag +
                      wo_.transpose() * dao;
            dc_next = (dc * f).matrix();
        }
        return dx;
    }

    std::vector<Eigen::MatrixXd*> params() override {
        return {&vi_, &vf_, &vc_, &vo_, &wi_, &wf_, &wc_, &wo_, &bi_, &bf_, &bc_, &bo_};
    }
    std::vector<Eigen::MatrixXd*> grads() override {
        return {&dvi_, &dvf_, &dvc_, &dvo_, &dwi_, &dwf_, &dwc_, &dwo_,
                &dbi_, &dbf_, &dbc_, &dbo_};
    }
    std::vector<std::string> param_names() const override {
        return {"V_i", "V_f", "V_c", "V_o", "W_i", "W_f", "W_c", "W_o",
                "b_i", "b_f", "b_c", "b_o"};
    }

    void init_params(Rng& rng) override {
        const Eigen::Index h = spec_.units;
        for (auto* m : {&vi_, &vf_, &vc_, &vo_}) glorot_fill(*m, din_, h, rng);
        for (auto* m : {&wi_, &wf_, &wc_, &wo_}) glorot_fill(*m, h, h, rng);
        for (auto* m : {&bi_, &bc_, &bo_}) m->setZero();
        bf_.setConstant(1.0);  // open forget gate at start of training
    }

private:
    void zero_grad_storage() {
        dvi_ = Eigen::MatrixXd::Zero(vi_.rows(), vi_.cols());
        dvf_ = Eigen::MatrixXd::Zero(vf_.rows(), vf_.cols());
        dvc_ = Eigen::MatrixXd::Zero(vc_.rows(), vc_.cols());
        dvo_ = Eigen::MatrixXd::Zero(vo_.rows(), vo_.cols());
        dwi_ = Eigen::MatrixXd::Zero(wi_.rows(), wi_.cols());
        dwf_ = Eigen::MatrixXd::Zero(wf_.rows(), wf_.cols());
        dwc_ = Eigen::MatrixXd::Zero(wc_.rows(), wc_.cols());
        dwo_ = Eigen::MatrixXd::Zero(wo_.rows(), wo_.cols());
        dbi_ = Eigen::MatrixXd::Zero(bi_.rows(), 1);
        dbf_ = Eigen::MatrixXd::Zero(bf_.rows(), 1);
        dbc_ = Eigen::MatrixXd::Zero(bc_.rows(), 1);
        dbo_ = Eigen::MatrixXd::Zero(bo_.rows(), 1);
    }

    LayerSpec spec_;
    Eigen::Index din_;
    Eigen::MatrixXd vi_, vf_, vc_, vo_, wi_, wf_, wc_, wo_, bi_, bf_, bc_, bo_;
    Eigen::MatrixXd dvi_, dvf_, dvc_, dvo_, dwi_, dwf_, dwc_, dwo_, dbi_, dbf_, dbc_, dbo_;
    Eigen::MatrixXd x_, h_, c_, ig_, fg_, gg_, og_, tc_;
};

// z = sigma(V_z x + W_z h' + b_z), r = sigma(V_r x + W_r h' + b_r),
// n = tanh(V_h x + W_h (r.h') + b_h), h = z.h' + (1-z).n
class Gru final : public Layer {
public:
    Gru(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), din_(in_channels) {
        const Eigen::Index h = spec_.units;
        for (auto* m : {&vz_, &vr_, &vh_}) *m = Eigen::MatrixXd::Zero(h, din_);
        for (auto* m : {&wz_, &wr_, &wh_}) *m = Eigen::MatrixXd::Zero(h, h);
        for (auto* m : {&bz_, &br_, &bh_}) *m = Eigen::MatrixXd::Zero(h, 1);
        dvz_ = vz_; dvr_ = vr_; dvh_ = vh_;
        dwz_ = wz_; dwr_ = wr_; dwh_ = wh_;
        dbz_ = bz_; dbr_ = br_; dbh_ = bh_;
    }

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {in_time, spec_.units};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != din_) throw ShapeError("gru input width mismatch");
        const Eigen::Index t_len = x.rows();
        const Eigen::Index h = spec_.units;
        x_ = x;
        h_ = Eigen::MatrixXd::Zero(t_len + 1, h);
        zg_.resize(t_len, h);
        rg_.resize(t_len, h);
        ng_.resize(t_len, h);
        rh_.resize(t_len, h);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const Eigen::VectorXd xt = x.row(t).transpose();
            const Eigen::VectorXd hp = h_.row(t).transpose();
            const Eigen::VectorXd z = sigmoid_v(vz_ * xt + wz_ * hp + bz_.col(0));
            const Eigen::VectorXd r = sigmoid_v(vr_ * xt + wr_ * hp + br_.col(0));
            const Eigen::VectorXd rh = r.cwiseProduct(hp);
            const Eigen::VectorXd n = (vh_ * xt + wh_ * rh + bh_.col(0)).array().tanh();
            zg_.row(t) = z.transpose();
            rg_.row(t) = r.transpose();
            ng_.row(t) = n.transpose();
            rh_.row(t) = rh.transpose();
            h_.row(t + 1) =
                (z.cwiseProduct(hp) + (Eigen::VectorXd::Ones(h) - z).cwiseProduct(n)).transpose();
        }
        return h_.bottomRows(t_len);
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        const Eigen::Index t_len = x_.rows();
        const Eigen::Index h = spec_.units;
        if (dy.rows() != t_len || dy.cols() != h) throw ShapeError("gru backward shape mismatch");
        Eigen::MatrixXd dx(t_len, din_);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
        for (Eigen::Index t = t_len - 1; t >= 0; --t) {
            const Eigen::VectorXd xt = x_.row(t).transpose();
            const Eigen::VectorXd hp = h_.row(t).transpose();
            const Eigen::ArrayXd z = zg_.row(t).transpose().array();
            const Eigen::ArrayXd r = rg_.row(t).transpose().array();
            const Eigen::ArrayXd n = ng_.row(t).transpose().array();

            const Eigen::ArrayXd dh = dy.row(t).transpose().array() + dh_next.array();
            const Eigen::VectorXd daz = (dh * (hp.array() - n) * z * (1.0 - z)).matrix();
            const Eigen::VectorXd dan = (dh * (1.0 - z) * (1.0 - n.square())).matrix();
            const Eigen::ArrayXd wn = (wh_.transpose() * dan).array();
            const Eigen::VectorXd dar = (wn * hp.array() * r * (1.0 - r)).matrix();

            dvz_ += daz * xt.transpose();
            dvr_ += dar * xt.transpose();
            dvh_ += dan * xt.transpose();
            dwz_ += daz * hp.transpose();
            dwr_ += dar * hp.transpose();
            dwh_ += dan * rh_.row(t);
            dbz_.col(0) += daz;
            dbr_.col(0) += dar;
            dbh_.col(0) += dan;

            dx.row(t) =
                (vz_.transpose() * daz + vr_.transpose() * dar + vh_.transpose() * dan).transpose();
            dh_next = (dh * z + wn * r).matrix() + wz_.transpose() * daz + wr_.transpose() * dar;
        }
        return dx;
    }

    std::vector<Eigen::MatrixXd*> params() override {
        return {&vz_, &vr_, &vh_, &wz_, &wr_, &wh_, &bz_, &br_, &bh_};
    }
    std::vector<Eigen::MatrixXd*> grads() override {
        return {&dvz_, &dvr_, &dvh_, &dwz_, &dwr_, &dwh_, &dbz_, &dbr_, &dbh_};
    }
    std::vector<std::string> param_names() const override {
        return {"V_z", "V_r", "V_h", "W_z", "W_r", "W_h", "b_z", "b_r", "b_h"};
    }

    void init_params(Rng& rng) override {
        const Eigen::Index h = spec_.units;
        for (auto* m : {&vz_, &vr_, &vh_}) glorot_fill(*m, din_, h, rng);
        for (auto* m : {&wz_, &wr_, &wh_}) glorot_fill(*m, h, h, rng);
        for (auto* m : {&bz_, &br_, &bh_}) m->setZero();
    }

private:
    LayerSpec spec_;
    Eigen::Index din_;
    Eigen::MatrixXd vz_, vr_, vh_, wz_, wr_, wh_, bz_, br_, bh_;
    Eigen::MatrixXd dvz_, dvr_, dvh_, dwz_, dwr_, dwh_, dbz_, dbr_, dbh_;
    Eigen::MatrixXd x_, h_, zg_, rg_, ng_, rh_;
};

// h = tanh(V x + W h' + b)
class SimpleRnn final : public Layer {
public:
    SimpleRnn(LayerSpec spec, Eigen::Index in_channels) : spec_(std::move(spec)), din_(in_channels) {
        const Eigen::Index h = spec_.units;
        v_ = Eigen::MatrixXd::Zero(h, din_);
        w_ = Eigen::MatrixXd::Zero(h, h);
        b_ = Eigen::MatrixXd::Zero(h, 1);
        dv_ = v_;
        dw_ = w_;
        db_ = b_;
    }

    const LayerSpec& spec() const override { return spec_; }

    std::pair<Eigen::Index, Eigen::Index> out_shape(Eigen::Index in_time) const override {
        return {in_time, spec_.units};
    }

    Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) override {
        if (x.cols() != din_) throw ShapeError("rnn input width mismatch");
        const Eigen::Index t_len = x.rows();
        x_ = x;
        h_ = Eigen::MatrixXd::Zero(t_len + 1, spec_.units);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const Eigen::VectorXd a =
                v_ * x.row(t).transpose() + w_ * h_.row(t).transpose() + b_.col(0);
            h_.row(t + 1) = a.array().tanh().transpose();
        }
        return h_.bottomRows(t_len);
    }

    Eigen::MatrixXd backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) override {
        const Eigen::Index t_len = x_.rows();
        if (dy.rows() != t_len || dy.cols() != spec_.units) {
            throw ShapeError("rnn backward shape mismatch");
        }
        Eigen::MatrixXd dx(t_len, din_);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(spec_.units);
        for (Eigen::Index t = t_len - 1; t >= 0; --t) {
            const Eigen::ArrayXd h = h_.row(t + 1).transpose().array();
            const Eigen::ArrayXd dh = dy.row(t).transpose().array() + dh_next.array();
            const Eigen::VectorXd da = (dh * (1.0 - h.square())).matrix();
            dv_ += da * x_.row(t);
            dw_ += da * h_.row(t);
            db_.col(0) += da;
            dx.row(t) = (v_.transpose() * da).transpose();
            dh_next = w_.transpose() * da;
        }
        return dx;
    }

    std::vector<Eigen::MatrixXd*> params() override { return {&v_, &w_, &b_}; }
    std::vector<Eigen::MatrixXd*> grads() override { return {&dv_, &dw_, &db_}; }
    std::vector<std::string> param_names() const override { return {"V", "W", "b"}; }

    void init_params(Rng& rng) override {
        glorot_fill(v_, din_, spec_.units, rng);
        glorot_fill(w_, spec_.units, spec_.units, rng);
        b_.setZero();
    }

private:
    LayerSpec spec_;
    Eigen::Index din_;
    Eigen::MatrixXd v_, w_, b_, dv_, dw_, db_;
    Eigen::MatrixXd x_, h_;
};

}  // namespace

Activation activation_from_name(std::string_view name) {
    if (name == "linear") return Activation::linear;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation: " + std::string(name));
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "linear";
}

LayerSpec LayerSpec::conv1d(int filters, int kernel) {
    LayerSpec s;
    s.kind = "conv1d";
    s.units = filters;
    s.kernel = kernel;
    return s;
}

LayerSpec LayerSpec::maxpool(int size) {
    LayerSpec s;
    s.kind = "maxpool";
    s.pool = size;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = "flatten";
    return s;
}

LayerSpec LayerSpec::lstm(int units) {
    LayerSpec s;
    s.kind = "lstm";
    s.units = units;
    return s;
}

LayerSpec LayerSpec::gru(int units) {
    LayerSpec s;
    s.kind = "gru";
    s.units = units;
    return s;
}

LayerSpec LayerSpec::rnn(int units) {
    LayerSpec s;
    s.kind = "rnn";
    s.units = units;
    return s;
}

LayerSpec LayerSpec::dense(int units, Activation act) {
    LayerSpec s;
    s.kind = "dense";
    s.units = units;
    s.activation = act;
    return s;
}

nlohmann::json LayerSpec::to_json() const {
    nlohmann::json j{{"kind", kind}};
    if (kind == "conv1d") {
        j["units"] = units;
        j["kernel"] = kernel;
    } else if (kind == "maxpool") {
        j["pool"] = pool;
    } else if (kind == "lstm" || kind == "gru" || kind == "rnn") {
        j["units"] = units;
    } else if (kind == "dense") {
        j["units"] = units;
        j["activation"] = activation_name(activation);
    }
    return j;
}

LayerSpec LayerSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw SchemaError("layer spec must be an object with a \"kind\" string");
    }
    LayerSpec s;
    s.kind = j.at("kind").get<std::string>();
    if (s.kind == "conv1d") {
        s.units = j.at("units").get<int>();
        s.kernel = j.value("kernel", 3);
    } else if (s.kind == "maxpool") {
        s.pool = j.at("pool").get<int>();
    } else if (s.kind == "lstm" || s.kind == "gru" || s.kind == "rnn") {
        s.units = j.at("units").get<int>();
    } else if (s.kind == "dense") {
        s.units = j.at("units").get<int>();
        s.activation = activation_from_name(j.value("activation", "linear"));
    } else if (s.kind != "flatten") {
        throw SchemaError("unknown layer kind: " + s.kind);
    }
    return s;
}

nlohmann::json NetworkSpec::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& l : layers) arr.push_back(l.to_json());
    return nlohmann::json{{"layers", std::move(arr)},
                          {"input_len", input_len},
                          {"input_channels", input_channels},
                          {"seed", seed}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("layers") || !j.at("layers").is_array()) {
        throw SchemaError("network spec must be an object with a \"layers\" array");
    }
    NetworkSpec s;
    for (const auto& lj : j.at("layers")) s.layers.push_back(LayerSpec::from_json(lj));
    s.input_len = j.at("input_len").get<Eigen::Index>();
    s.input_channels = j.value("input_channels", Eigen::Index{1});
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
}

NetworkSpec build_preset(std::string_view name, Eigen::Index input_len, std::uint64_t seed) {
    NetworkSpec s;
    s.input_len = input_len;
    s.input_channels = 1;
    s.seed = seed;
    if (name == "cnn-lstm-1") {
        s.layers = {LayerSpec::conv1d(16), LayerSpec::conv1d(32), LayerSpec::maxpool(2),
                    LayerSpec::lstm(50),   LayerSpec::flatten(),  LayerSpec::dense(1)};
    } else if (name == "cnn-lstm-2") {
        s.layers = {LayerSpec::conv1d(32), LayerSpec::maxpool(2), LayerSpec::lstm(25),
                    LayerSpec::lstm(50),   LayerSpec::flatten(),  LayerSpec::dense(1)};
    } else if (name == "mlp") {
        s.layers = {LayerSpec::flatten(), LayerSpec::dense(50, Activation::relu),
                    LayerSpec::dense(1)};
    } else if (name == "rnn") {
        s.layers = {LayerSpec::rnn(50), LayerSpec::flatten(), LayerSpec::dense(1)};
    } else if (name == "gru") {
        s.layers = {LayerSpec::gru(50), LayerSpec::flatten(), LayerSpec::dense(1)};
    } else if (name == "lstm") {
        s.layers = {LayerSpec::lstm(50), LayerSpec::flatten(), LayerSpec::dense(1)};
    } else {
        throw ConfigError("unknown preset: " + std::string(name));
    }
    return s;
}

void Layer::zero_grads() {
    for (auto* g : grads()) g->setZero();
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Eigen::Index in_channels) {
    require(in_channels >= 1, "layer input must have at least one channel");
    if (spec.kind == "conv1d") {
        require(spec.units >= 1, "conv1d needs at least one filter");
        require(spec.kernel >= 1 && spec.kernel % 2 == 1,
                "conv1d kernel size must be odd and positive");
        return std::make_unique<Conv1d>(spec, in_channels);
    }
    if (spec.kind == "maxpool") {
        require(spec.pool >= 1, "maxpool size must be positive");
        return std::make_unique<MaxPool1d>(spec, in_channels);
    }
    if (spec.kind == "flatten") return std::make_unique<Flatten>(spec, in_channels);
    if (spec.kind == "lstm" || spec.kind == "gru" || spec.kind == "rnn") {
        require(spec.units >= 1, spec.kind + " needs at least one unit");
        if (spec.kind == "lstm") return std::make_unique<Lstm>(spec, in_channels);
        if (spec.kind == "gru") return std::make_unique<Gru>(spec, in_channels);
        return std::make_unique<SimpleRnn>(spec, in_channels);
    }
    if (spec.kind == "dense") {
        require(spec.units >= 1, "dense needs at least one unit");
        return std::make_unique<Dense>(spec, in_channels);
    }
    throw ConfigError("unknown layer kind: " + spec.kind);
}

Network::Network(const NetworkSpec& spec) : spec_(spec) {
    require(spec_.input_len >= 1, "network input length must be positive");
    require(spec_.input_channels >= 1, "network input must have at least one channel");
    require(!spec_.layers.empty(), "network has no layers");
    Eigen::Index t_len = spec_.input_len;
    Eigen::Index ch = spec_.input_channels;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        auto layer = make_layer(spec_.layers[i], ch);
        const auto [ot, oc] = layer->out_shape(t_len);
        if (ot < 1 || oc < 1) {
            throw ConfigError("layer " + std::to_string(i) + " (" + spec_.layers[i].kind +
                              ") produces an empty output");
        }
        t_len = ot;
        ch = oc;
        Rng init = Rng::substream(spec_.seed, "init", i);
        layer->init_params(init);
        layers_.push_back(std::move(layer));
    }
}

Eigen::MatrixXd Network::forward(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (x.rows() != spec_.input_len || x.cols() != spec_.input_channels) {
        throw ShapeError("network input must be " + std::to_string(spec_.input_len) + "x" +
                         std::to_string(spec_.input_channels) + ", got " +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    Eigen::MatrixXd cur = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        cur = layers_[i]->forward(cur);
        if (!cur.allFinite()) {
            throw NumericFault("non-finite activation after layer " + std::to_string(i) + " (" +
                               spec_.layers[i].kind + ")");
        }
    }
    return cur;
}

void Network::backward(const Eigen::Ref<const Eigen::MatrixXd>& dy) {
    Eigen::MatrixXd cur = dy;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        cur = layers_[i]->backward(cur);
        if (!cur.allFinite()) {
            throw NumericFault("non-finite gradient below layer " + std::to_string(i) + " (" +
                               spec_.layers[i].kind + ")");
        }
        for (auto* g : layers_[i]->grads()) {
            if (!g->allFinite()) {
                throw NumericFault("non-finite parameter gradient in layer " + std::to_string(i) +
                                   " (" + spec_.layers[i].kind + ")");
            }
        }
    }
}

double Network::predict_one(const Eigen::Ref<const Eigen::VectorXd>& window) {
    if (spec_.input_channels != 1) {
        throw ShapeError("predict_one requires a single-channel network");
    }
    const Eigen::MatrixXd out = forward(window);
    if (out.size() != 1) throw ShapeError("network output is not a scalar");
    return out(0, 0);
}

std::vector<Eigen::MatrixXd*> Network::params() {
    std::vector<Eigen::MatrixXd*> all;
    for (auto& l : layers_) {
        for (auto* p : l->params()) all.push_back(p);
    }
    return all;
}

std::vector<Eigen::MatrixXd*> Network::grads() {
    std::vector<Eigen::MatrixXd*> all;
    for (auto& l : layers_) {
        for (auto* g : l->grads()) all.push_back(g);
    }
    return all;
}

void Network::zero_grads() {
    for (auto& l : layers_) l->zero_grads();
}

Eigen::Index Network::param_count() {
    Eigen::Index n = 0;
    for (auto& l : layers_) {
        for (auto* p : l->params()) n += p->size();
    }
    return n;
}

nlohmann::json Network::state_json() {
    nlohmann::json layers = nlohmann::json::array();
    for (auto& lp : layers_) {
        auto& l = *lp;
        nlohmann::json entry{{"kind", l.spec().kind}};
        nlohmann::json params = nlohmann::json::object();
        const auto names = l.param_names();
        const auto ptrs = l.params();
        for (std::size_t k = 0; k < ptrs.size(); ++k) {
            const Eigen::MatrixXd& m = *ptrs[k];
            nlohmann::json data = nlohmann::json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
            }
            params[names[k]] = nlohmann::json{{"shape", {m.rows(), m.cols()}},
                                              {"data", std::move(data)}};
        }
        entry["params"] = std::move(params);
        layers.push_back(std::move(entry));
    }
    return nlohmann::json{{"version", 1}, {"layers", std::move(layers)}};
}

void Network::load_state(const nlohmann::json& j) {
    if (!j.is_object() || j.value("version", 0) != 1) {
        throw SchemaError("unsupported network state version");
    }
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != layers_.size()) {
        throw SchemaError("network state has " + std::to_string(layers.size()) +
                          " layers, expected " + std::to_string(layers_.size()));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& entry = layers.at(i);
        if (entry.value("kind", "") != layers_[i]->spec().kind) {
            throw SchemaError("layer " + std::to_string(i) + " kind mismatch in network state");
        }
        const auto names = layers_[i]->param_names();
        const auto ptrs = layers_[i]->params();
        for (std::size_t k = 0; k < ptrs.size(); ++k) {
            const auto& pj = entry.at("params").at(names[k]);
            const auto& shape = pj.at("shape");
            const Eigen::Index rows = shape.at(0).get<Eigen::Index>();
            const Eigen::Index cols = shape.at(1).get<Eigen::Index>();
            if (rows != ptrs[k]->rows() || cols != ptrs[k]->cols()) {
                throw SchemaError("parameter " + names[k] + " of layer " + std::to_string(i) +
                                  " has shape " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ", expected " +
                                  std::to_string(ptrs[k]->rows()) + "x" +
                                  std::to_string(ptrs[k]->cols()));
            }
            const auto& data = pj.at("data");
            if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
                throw SchemaError("parameter data length mismatch in network state");
            }
            Eigen::Index idx = 0;
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index c = 0; c < cols; ++c) {
                    (*ptrs[k])(r, c) = data.at(idx++).get<double>();
                }
            }
        }
    }
}

double mse_loss(const Eigen::Ref<const Eigen::VectorXd>& pred,
                const Eigen::Ref<const Eigen::VectorXd>& target) {
    if (pred.size() != target.size()) throw ShapeError("mse_loss length mismatch");
    if (pred.size() == 0) throw InsufficientDataError("mse_loss on empty vectors");
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

Eigen::VectorXd mse_grad(const Eigen::Ref<const Eigen::VectorXd>& pred,
                         const Eigen::Ref<const Eigen::VectorXd>& target) {
    if (pred.size() != target.size()) throw ShapeError("mse_grad length mismatch");
    if (pred.size() == 0) throw InsufficientDataError("mse_grad on empty vectors");
    return 2.0 * (pred - target) / static_cast<double>(pred.size());
}

Adam::Adam(std::vector<Eigen::MatrixXd*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    require(cfg_.lr >= 0, "Adam learning rate must be non-negative");
    require(cfg_.weight_decay >= 0, "Adam weight decay must be non-negative");
    require(cfg_.beta1 > 0 && cfg_.beta1 < 1 && cfg_.beta2 > 0 && cfg_.beta2 < 1,
            "Adam betas must lie in (0, 1)");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
        m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
}

void Adam::step(const std::vector<Eigen::MatrixXd*>& grads) {
    if (grads.size() != params_.size()) throw ShapeError("Adam gradient list length mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Eigen::MatrixXd& p = *params_[k];
        const Eigen::MatrixXd& g = *grads[k];
        if (g.rows() != p.rows() || g.cols() != p.cols()) {
            throw ShapeError("Adam gradient shape mismatch at parameter " + std::to_string(k));
        }
        p -= cfg_.lr * cfg_.weight_decay * p;  // decoupled decay, before moments
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        p.array() -=
            cfg_.lr * (m_[k].array() / bc1) / ((v_[k].array() / bc2).sqrt() + cfg_.eps);
    }
}

namespace {

double rel_err(double a, double b) {
    const double denom = std::max(std::abs(a) + std::abs(b), 1e-6);
    return std::abs(a - b) / denom;
}

}  // namespace

GradCheck gradient_check_layer(Layer& layer, Eigen::Index in_time, Eigen::Index in_channels,
                               std::uint64_t seed, double eps) {
    Rng rng = Rng::substream(seed, "gradcheck");
    Eigen::MatrixXd x(in_time, in_channels);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
    }
    const Eigen::MatrixXd y0 = layer.forward(x);
    Eigen::MatrixXd sens(y0.rows(), y0.cols());
    for (Eigen::Index r = 0; r < sens.rows(); ++r) {
        for (Eigen::Index c = 0; c < sens.cols(); ++c) sens(r, c) = rng.normal();
    }

    layer.zero_grads();
    layer.forward(x);
    const Eigen::MatrixXd dx_analytic = layer.backward(sens);
    std::vector<Eigen::MatrixXd> grads_analytic;
    for (auto* g : layer.grads()) grads_analytic.push_back(*g);

    const auto loss = [&](const Eigen::MatrixXd& input) {
        return (sens.array() * layer.forward(input).array()).sum();
    };

    GradCheck result;
    const auto compare = [&](double analytic, double numeric) {
        result.max_rel_err = std::max(result.max_rel_err, rel_err(analytic, numeric));
        ++result.checked;
    };

    const auto ptrs = layer.params();
    for (std::size_t k = 0; k < ptrs.size(); ++k) {
        Eigen::MatrixXd& p = *ptrs[k];
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const double orig = p(r, c);
                p(r, c) = orig + eps;
                const double up = loss(x);
                p(r, c) = orig - eps;
                const double down = loss(x);
                p(r, c) = orig;
                compare(grads_analytic[k](r, c), (up - down) / (2.0 * eps));
            }
        }
    }
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double orig = x(r, c);
            x(r, c) = orig + eps;
            const double up = loss(x);
            x(r, c) = orig - eps;
            const double down = loss(x);
            x(r, c) = orig;
            compare(dx_analytic(r, c), (up - down) / (2.0 * eps));
        }
    }
    return result;
}

GradCheck gradient_check_network(Network& net, std::uint64_t seed, double eps) {
    Rng rng = Rng::substream(seed, "gradcheck");
    Eigen::MatrixXd x(net.spec().input_len, net.spec().input_channels);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
    }
    const Eigen::MatrixXd out0 = net.forward(x);
    Eigen::MatrixXd target(out0.rows(), out0.cols());
    for (Eigen::Index r = 0; r < target.rows(); ++r) {
        for (Eigen::Index c = 0; c < target.cols(); ++c) target(r, c) = rng.normal();
    }
    const double n = static_cast<double>(out0.size());

    const auto loss = [&](const Eigen::MatrixXd& input) {
        return (net.forward(input) - target).squaredNorm() / n;
    };

    net.zero_grads();
    const Eigen::MatrixXd out = net.forward(x);
    net.backward(2.0 * (out - target) / n);
    std::vector<Eigen::MatrixXd> grads_analytic;
    for (auto* g : net.grads()) grads_analytic.push_back(*g);

    GradCheck result;
    const auto ptrs = net.params();
    for (std::size_t k = 0; k < ptrs.size(); ++k) {
        Eigen::MatrixXd& p = *ptrs[k];
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const double orig = p(r, c);
                p(r, c) = orig + eps;
                const double up = loss(x);
                p(r, c) = orig - eps;
                const double down = loss(x);
                p(r, c) = orig;
                const double numeric = (up - down) / (2.0 * eps);
                result.max_rel_err =
                    std::max(result.max_rel_err, rel_err(grads_analytic[k](r, c), numeric));
                ++result.checked;
            }
        }
    }
    return result;
}

}  // namespace seepline::nn
