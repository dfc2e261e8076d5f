#include "driftcal/samples.hpp"

#include <fstream>

#include "driftcal/dataset.hpp"

namespace driftcal {

Eigen::MatrixXd PosteriorSamples::hyper_draws() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(draws()), static_cast<Eigen::Index>(2 * delta.size()));
    for (std::size_t k = 0; k < delta.size(); ++k) out.middleCols(static_cast<Eigen::Index>(2 * k), 2) = delta[k].hyper;
    return out;
}

void PosteriorSamples::validate() const {
    const auto t = static_cast<Eigen::Index>(draws());
    auto fail = [](const std::string& what) { throw DomainError("posterior samples: " + what); };
    if (log_post.size() != t || theta.rows() != t) fail("columns have different lengths");
    for (const auto& f : delta)
        if (f.values.rows() != t || f.hyper.rows() != t || f.values.cols() != knots.rows())
            fail("field " + f.name + " has inconsistent shape");
    if (additive && (additive->values.rows() != t || additive->values.cols() != knots.rows()))
        fail("additive discrepancy has inconsistent shape");
    std::size_t total = 0;
    for (auto n : chain_lengths) total += n;
    if (total != draws()) fail("chain lengths do not add up to the number of draws");
    for (const auto& [name, rate] : acceptance)
        if (!(rate >= 0.0 && rate <= 1.0)) fail("acceptance rate of " + name + " outside [0,1]");
    if (!(sigma2.array() > 0.0).all()) fail("non-positive noise variance");
}

std::vector<std::vector<double>> PosteriorSamples::by_chain(const Eigen::VectorXd& column) const {
    if (static_cast<std::size_t>(column.size()) != draws()) throw DimensionError("column length differs from draw count");
    std::vector<std::vector<double>> out;
    Eigen::Index start = 0;
    for (auto n : chain_lengths) {
        out.emplace_back(column.data() + start, column.data() + start + static_cast<Eigen::Index>(n));
        start += static_cast<Eigen::Index>(n);
    }
    return out;
}

double PosteriorSamples::acceptance_rate(const std::string& block) const {
    for (const auto& [name, rate] : acceptance)
        if (name == block) return rate;
    throw DomainError("no block named " + block);
}

PosteriorSamples PosteriorSamples::merge(const std::vector<PosteriorSamples>& chains) {
    if (chains.empty()) throw DomainError("nothing to merge");
    if (chains.size() == 1) return chains.front();
    const PosteriorSamples& first = chains.front();
    Eigen::Index total = 0;
    for (const auto& c : chains) {
        if (c.delta.size() != first.delta.size() || c.additive.has_value() != first.additive.has_value() ||
            c.knots.rows() != first.knots.rows() || c.acceptance.size() != first.acceptance.size())
            throw DimensionError("chains have different layouts");
        total += static_cast<Eigen::Index>(c.draws());
    }

    auto stack = [&](auto get) {
        using M = std::decay_t<decltype(get(first))>;
        M out(total, get(first).cols());
        Eigen::Index row = 0;
        for (const auto& c : chains) {
            const auto& m = get(c);
            out.middleRows(row, m.rows()) = m;
            row += m.rows();
        }
        return out;
    };

    PosteriorSamples out;
    out.method = first.method;
    out.knots = first.knots;
    out.theta_names = first.theta_names;
    for (std::size_t k = 0; k < first.delta.size(); ++k)
        out.delta.push_back({first.delta[k].name,
                             stack([k](const PosteriorSamples& s) -> const Eigen::MatrixXd& { return s.delta[k].values; }),
                             stack([k](const PosteriorSamples& s) -> const Eigen::MatrixXd& { return s.delta[k].hyper; })});
    if (first.additive)
        out.additive = FieldDraws{first.additive->name,
                                  stack([](const PosteriorSamples& s) -> const Eigen::MatrixXd& { return s.additive->values; }),
                                  stack([](const PosteriorSamples& s) -> const Eigen::MatrixXd& { return s.additive->hyper; })};
    out.theta = stack([](const PosteriorSamples& s) -> const Eigen::MatrixXd& { return s.theta; });
    out.sigma2.resize(total);
    out.log_post.resize(total);
    Eigen::Index row = 0;
    for (const auto& c : chains) {
        const auto n = static_cast<Eigen::Index>(c.draws());
        out.sigma2.segment(row, n) = c.sigma2;
        out.log_post.segment(row, n) = c.log_post;
        row += n;
        out.chain_lengths.insert(out.chain_lengths.end(), c.chain_lengths.begin(), c.chain_lengths.end());
        out.extrapolation.merge(c.extrapolation);
        out.audits += c.audits;
    }
    const double nc = static_cast<double>(chains.size());
    for (std::size_t b = 0; b < first.acceptance.size(); ++b) {
        double rate = 0.0, step = 0.0;
        for (const auto& c : chains) {
            rate += c.acceptance[b].second;
            if (b < c.final_steps.size()) step += c.final_steps[b];
        }
        out.acceptance.emplace_back(first.acceptance[b].first, rate / nc);
        out.final_steps.push_back(step / nc);
    }
    return out;
}

namespace {

std::ofstream open(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

}  // namespace

void write_samples(const std::filesystem::path& dir, const PosteriorSamples& samples,
                   const CalibrationDataset& data, const Standardizer& target) {
    samples.validate();
    std::filesystem::create_directories(dir);
    {
        auto os = open(dir / "FORMAT");
        os << kSamplesFormatTag << '\n' << "method " << samples.method << '\n';
    }
    const auto t = static_cast<Eigen::Index>(samples.draws());
    const auto k = samples.knots.rows();
    {
        auto os = open(dir / "knots.csv");
        std::vector<std::string> cols;
        for (std::size_t j = 0; j < data.x_dim(); ++j) cols.push_back(data.x_names.at(j));
        write_header(os, cols);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::VectorXd x = data.x_from_unit(samples.knots.row(i).transpose());
            for (Eigen::Index j = 0; j < x.size(); ++j) os << (j ? "," : "") << format_double(x[j]);
            os << '\n';
        }
    }
    for (std::size_t f = 0; f < samples.delta.size(); ++f) {
        const double width = data.theta_bounds.at(f).width();
        auto os = open(dir / ("delta_" + samples.delta[f].name + ".csv"));
        std::vector<std::string> cols;
        for (Eigen::Index i = 0; i < k; ++i) cols.push_back("knot" + std::to_string(i));
        write_header(os, cols);
        for (Eigen::Index r = 0; r < t; ++r) {
            for (Eigen::Index i = 0; i < k; ++i) os << (i ? "," : "") << format_double(samples.delta[f].values(r, i) * width);
            os << '\n';
        }
    }
    {
        auto os = open(dir / "hyper.csv");
        std::vector<std::string> cols;
        for (const auto& f : samples.delta) {
            cols.push_back("variance." + f.name);
            cols.push_back("lengthscale." + f.name);
        }
        if (samples.additive) {
            cols.push_back("variance.delta_eta");
            cols.push_back("lengthscale.delta_eta");
        }
        write_header(os, cols);
        for (Eigen::Index r = 0; r < t; ++r) {
            bool first = true;
            auto put = [&](double v) {
                os << (first ? "" : ",") << format_double(v);
                first = false;
            };
            for (const auto& f : samples.delta) {
                put(f.hyper(r, 0));
                put(f.hyper(r, 1));
            }
            if (samples.additive) {
                put(samples.additive->hyper(r, 0));
                put(samples.additive->hyper(r, 1));
            }
            os << '\n';
        }
    }
    {
        auto os = open(dir / "theta.csv");
        write_header(os, samples.theta_names);
        for (Eigen::Index r = 0; r < t; ++r) {
            const Eigen::VectorXd th = data.theta_from_unit(samples.theta.row(r).transpose());
            for (Eigen::Index j = 0; j < th.size(); ++j) os << (j ? "," : "") << format_double(th[j]);
            os << '\n';
        }
    }
    {
        auto os = open(dir / "sigma2.csv");
        os << "sigma2,log_post\n";
        for (Eigen::Index r = 0; r < t; ++r)
            os << format_double(samples.sigma2[r] * target.scale * target.scale) << ','
               << format_double(samples.log_post[r]) << '\n';
    }
    if (samples.additive) {
        auto os = open(dir / "additive.csv");
        std::vector<std::string> cols;
        for (Eigen::Index i = 0; i < k; ++i) cols.push_back("knot" + std::to_string(i));
        write_header(os, cols);
        for (Eigen::Index r = 0; r < t; ++r) {
            for (Eigen::Index i = 0; i < k; ++i)
                os << (i ? "," : "") << format_double(samples.additive->values(r, i) * target.scale);
            os << '\n';
        }
    }
    {
        auto os = open(dir / "acceptance.csv");
        os << "block,rate,final_step\n";
        for (std::size_t b = 0; b < samples.acceptance.size(); ++b)
            os << samples.acceptance[b].first << ',' << format_double(samples.acceptance[b].second) << ','
               << format_double(b < samples.final_steps.size() ? samples.final_steps[b] : 0.0) << '\n';
    }
}

}  // namespace driftcal
