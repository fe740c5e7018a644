#pragma once

#include <Eigen/Core>

namespace crossclone {

enum class ProjectionKind { identity, batchnorm };

enum class RunMode { train, infer };

// Projection applied to encoded vectors before the distance computation.
// Identity passes inputs through; batchnorm standardises each dimension with
// learned gamma/beta. Training uses batch statistics and maintains running
// statistics for inference: running = momentum * running + (1-momentum) * batch.
struct ProjectionHead {
    ProjectionKind kind = ProjectionKind::identity;
    Eigen::VectorXd gamma, beta;
    Eigen::VectorXd running_mean, running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    static ProjectionHead identity();
    static ProjectionHead batchnorm(int dim);

    int dim() const { return static_cast<int>(gamma.size()); }

    // Intermediate values the batchnorm backward pass needs.
    struct Cache {
        Eigen::MatrixXd xhat;     // standardised inputs
        Eigen::VectorXd inv_std;  // 1 / sqrt(var + eps), per dimension
    };

    // Rows of x are vectors in a batch. Train mode requires at least one row
    // and updates the running statistics; infer mode uses them read-only.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, RunMode mode);
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, RunMode mode, Cache* cache);

    // Inference-mode forward; each row is normalised independently with the
    // running statistics.
    Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const;

    // Backpropagates through a train-mode forward (batch statistics are part
    // of the computation graph). Accumulates parameter gradients into
    // dgamma/dbeta and returns dL/dx.
    Eigen::MatrixXd backward(const Eigen::MatrixXd& dout, const Cache& cache,
                             Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) const;
};

} // namespace crossclone
