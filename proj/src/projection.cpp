#include "crossclone/projection.hpp"

#include "crossclone/errors.hpp"

namespace crossclone {

ProjectionHead ProjectionHead::identity() {
    ProjectionHead head;
    head.kind = ProjectionKind::identity;
    return head;
}

ProjectionHead ProjectionHead::batchnorm(int dim) {
    if (dim <= 0) throw ValidationError("projection: dim must be positive");
    ProjectionHead head;
    head.kind = ProjectionKind::batchnorm;
    head.gamma = Eigen::VectorXd::Ones(dim);
    head.beta = Eigen::VectorXd::Zero(dim);
    head.running_mean = Eigen::VectorXd::Zero(dim);
    head.running_var = Eigen::VectorXd::Ones(dim);
    return head;
}

Eigen::MatrixXd ProjectionHead::forward(const Eigen::MatrixXd& x, RunMode mode) {
    return forward(x, mode, nullptr);
}

Eigen::MatrixXd ProjectionHead::infer(const Eigen::MatrixXd& x) const {
    if (kind == ProjectionKind::identity) return x;
    if (x.cols() != gamma.size()) {
        throw ValidationError("projection: input dimension mismatch");
    }
    const Eigen::RowVectorXd inv_std =
        (running_var.transpose().array() + eps).sqrt().inverse().matrix();
    Eigen::MatrixXd xhat =
        ((x.rowwise() - running_mean.transpose()).array().rowwise() * inv_std.array()).matrix();
    Eigen::MatrixXd out = (xhat.array().rowwise() * gamma.transpose().array()).matrix();
    out.rowwise() += beta.transpose();
    return out;
}

Eigen::MatrixXd ProjectionHead::forward(const Eigen::MatrixXd& x, RunMode mode, Cache* cache) {
    if (kind == ProjectionKind::identity) {
        if (cache != nullptr) {
            cache->xhat = x;
            cache->inv_std = Eigen::VectorXd::Ones(x.cols());
        }
        return x;
    }
    if (x.cols() != gamma.size()) {
        throw ValidationError("projection: input dimension mismatch");
    }
    if (mode == RunMode::infer) {
        if (cache != nullptr) throw ValidationError("projection: no backward in infer mode");
        return infer(x);
    }
    const Eigen::Index b = x.rows();
    if (b == 0) throw ValidationError("projection: empty batch in train mode");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var =
        (x.rowwise() - mean).array().square().colwise().mean().matrix();
    running_mean = momentum * running_mean + (1.0 - momentum) * mean.transpose();
    running_var = momentum * running_var + (1.0 - momentum) * var.transpose();
    const Eigen::RowVectorXd inv_std = (var.array() + eps).sqrt().inverse().matrix();
    Eigen::MatrixXd xhat = ((x.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
    Eigen::MatrixXd out = (xhat.array().rowwise() * gamma.transpose().array()).matrix();
    out.rowwise() += beta.transpose();
    if (cache != nullptr) {
        cache->xhat = std::move(xhat);
        cache->inv_std = inv_std.transpose();
    }
    return out;
}

Eigen::MatrixXd ProjectionHead::backward(const Eigen::MatrixXd& dout, const Cache& cache,
                                         Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) const {
    if (kind == ProjectionKind::identity) {
        return dout;
    }
    if (dout.rows() != cache.xhat.rows() || dout.cols() != cache.xhat.cols()) {
        throw ValidationError("projection: gradient shape mismatch");
    }
    const double b = static_cast<double>(dout.rows());
    dgamma += (dout.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
    dbeta += dout.colwise().sum().transpose();

    // dL/dx for batch statistics: with dxhat = dout * gamma,
    //   dx = inv_std/B * (B*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat)).
    const Eigen::MatrixXd dxhat =
        (dout.array().rowwise() * gamma.transpose().array()).matrix();
    const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dxhat_xhat =
        (dxhat.array() * cache.xhat.array()).colwise().sum().matrix();
    Eigen::MatrixXd dx = b * dxhat;
    dx.rowwise() -= sum_dxhat;
    dx -= (cache.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    dx = (dx.array().rowwise() * (cache.inv_std.transpose().array() / b)).matrix();
    return dx;
}

} // namespace crossclone
