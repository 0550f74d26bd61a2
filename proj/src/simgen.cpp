#include "edgecov/simgen.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "edgecov/rng.hpp"

namespace edgecov::simgen {

using covariance::Matrix;
using covariance::Vector;

Arrangement arrangement_from_string(const std::string& s) {
    if (s == "contiguous") return Arrangement::contiguous;
    if (s == "scattered") return Arrangement::scattered;
    if (s == "shuffled") return Arrangement::shuffled;
    throw std::invalid_argument("unknown arrangement '" + s +
                                "' (expected contiguous, scattered, or shuffled)");
}

std::string to_string(Arrangement a) {
    switch (a) {
        case Arrangement::contiguous: return "contiguous";
        case Arrangement::scattered: return "scattered";
        case Arrangement::shuffled: return "shuffled";
    }
    throw std::logic_error("invalid arrangement value");
}

std::vector<int> preset_scattered_labels(int v) {
    switch (v) {
        case 10:
            return {1, 2, 3, 1, 2, 3, 1, 2, 3, 3};
        case 20:
            return {1, 5, 2, 4, 1, 3, 4, 5, 3, 2, 5, 1, 4, 3, 2, 5, 1, 4, 2, 3};
        case 30:
            return {3, 5, 2, 4, 1, 6, 1, 5, 3, 2, 4, 6, 1, 3, 5,
                    2, 4, 6, 1, 3, 5, 2, 4, 6, 1, 3, 5, 2, 4, 6};
        case 40:
            return {6, 1, 7, 7, 4, 8, 2, 5, 8, 5, 2, 3, 2, 4, 3, 1, 6, 7, 4, 3,
                    5, 4, 7, 1, 6, 2, 8, 1, 4, 1, 8, 6, 6, 3, 2, 5, 7, 5, 8, 3};
        default:
            return {};
    }
}

GroundTruth make_ground_truth(const std::vector<int>& group_sizes,
                              const std::vector<double>& rho_within,
                              double rho0, double lambda, Arrangement arrangement,
                              EntryMap map, std::uint64_t shuffle_seed) {
    if (group_sizes.empty()) throw std::invalid_argument("group_sizes is empty");
    int v = 0;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        if (group_sizes[g] < 3)
            throw std::invalid_argument("group " + std::to_string(g + 1) +
                                        " has fewer than 3 nodes");
        v += group_sizes[g];
    }
    if (rho_within.size() != group_sizes.size())
        throw std::invalid_argument("rho_within has " + std::to_string(rho_within.size()) +
                                    " entries for " + std::to_string(group_sizes.size()) +
                                    " groups");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");

    const int k = static_cast<int>(group_sizes.size());
    std::vector<int> labels;
    labels.reserve(v);
    for (int g = 0; g < k; ++g)
        labels.insert(labels.end(), group_sizes[g], g + 1);

    if (arrangement == Arrangement::scattered) {
        std::vector<int> preset = preset_scattered_labels(v);
        if (preset.empty())
            throw std::invalid_argument("no preset scattered layout for " + std::to_string(v) +
                                        " nodes; use shuffled");
        std::vector<int> counts(k + 1, 0);
        for (int lab : preset) {
            if (lab < 1 || lab > k)
                throw std::invalid_argument("preset scattered layout for " + std::to_string(v) +
                                            " nodes uses " + "class ids outside 1.." +
                                            std::to_string(k));
            ++counts[lab];
        }
        for (int g = 0; g < k; ++g)
            if (counts[g + 1] != group_sizes[g])
                throw std::invalid_argument(
                    "preset scattered layout for " + std::to_string(v) +
                    " nodes has class sizes incompatible with the requested group_sizes");
        labels = preset;
    } else if (arrangement == Arrangement::shuffled) {
        Rng rng(mix_seed(shuffle_seed, 0x73687566ULL));
        std::shuffle(labels.begin(), labels.end(), rng);
    }

    GroundTruth gt;
    gt.v = v;
    gt.group_sizes = group_sizes;
    gt.partition = Partition::from_labels(labels, k);
    std::vector<double> rho(static_cast<std::size_t>(k) + 1);
    rho[0] = rho0;
    std::copy(rho_within.begin(), rho_within.end(), rho.begin() + 1);
    gt.rho = RhoParams::of(rho);
    gt.lambda = lambda;
    gt.map = map;
    gt.arrangement = arrangement;
    return gt;
}

likelihood::EdgeData generate(const GroundTruth& gt, int s, std::uint64_t seed) {
    if (s < 2) throw std::invalid_argument("need at least 2 subjects");
    covariance::StructuredCov sc =
        covariance::build_structured(gt.partition, gt.rho, gt.lambda, gt.v, gt.map);
    covariance::PdReport pd = covariance::is_positive_definite(sc);
    if (!pd.ok)
        throw std::invalid_argument("generation covariance is not positive definite: " +
                                    pd.diagnostic);
    Matrix sigma = covariance::materialize(sc);
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("Cholesky factorization of the generation covariance failed");
    Matrix l = llt.matrixL();

    const int e = sc.e;
    Matrix r(s, e);
    Rng rng(mix_seed(seed, 0x67656e00ULL));
    Vector z(e);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < e; ++j) z(j) = rnorm(rng, 0.0, 1.0);
        r.row(i) = (l * z).transpose();
    }
    return likelihood::EdgeData::from_r(std::move(r));
}

} // namespace edgecov::simgen
