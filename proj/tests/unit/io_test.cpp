#include "support.hpp"

#include <certbayes/io.hpp>

using namespace certbayes;

namespace {

template <typename T>
T round_trip(const T& v)
{
    return io::from_json<T>(io::json::parse(io::to_json(v).dump()));
}

} // namespace

TEST_CASE("value types round-trip bit-identically")
{
    CHECK(round_trip(NoiseModel(1.0 / 9)).sigma_sq == 1.0 / 9);
    CHECK(round_trip(IsotropicPrior(0.1 + 0.2)).sigma_p_sq == 0.1 + 0.2);
    const auto b = round_trip(PerturbationBudget(0.1, 1e-17));
    CHECK(b.delta_train == 0.1);
    CHECK(b.delta_test == 1e-17);
    const auto dd = round_trip(DataDistributionSpec(3.3, 0.5));
    CHECK(dd.sigma_x_sq == 3.3);
    CHECK(dd.theta_star_norm_sq == 0.5);

    std::mt19937_64 rng(1);
    const auto ds = testing::random_dataset(rng, 7, 3);
    const auto ds2 = round_trip(ds);
    CHECK(ds2.X == ds.X);
    CHECK(ds2.Y == ds.Y);

    const auto post = bayes_posterior(ds, NoiseModel(0.3), IsotropicPrior(2));
    const auto post2 = round_trip(post);
    CHECK(post2.mean == post.mean);
    CHECK(post2.precision.matrix() == post.precision.matrix());

    SampleSet<double> s;
    s.draws = testing::normal_matrix(rng, 5, 3);
    s.seed = 99;
    s.acceptance_rate = 0.81234567890123;
    s.step_size = 0.1;
    s.divergences = 2;
    const auto s2 = round_trip(s);
    CHECK(s2.draws == s.draws);
    CHECK(s2.seed == 99);
    CHECK(s2.acceptance_rate == s.acceptance_rate);
    CHECK(s2.divergences == 2);

    HmcConfig h;
    h.seed = 12345678901234ULL;
    h.metric = MetricKind::Diagonal;
    h.target_accept = 0.85;
    const auto h2 = round_trip(h);
    CHECK(h2.seed == h.seed);
    CHECK(h2.metric == MetricKind::Diagonal);
    CHECK(h2.target_accept == 0.85);

    SyntheticSpec spec;
    spec.n = 17;
    spec.sigma_sq = 1.0 / 9;
    const auto spec2 = round_trip(spec);
    CHECK(spec2.n == 17);
    CHECK(spec2.sigma_sq == 1.0 / 9);
}

TEST_CASE("certificate report round-trips, NaN as null")
{
    std::mt19937_64 rng(2);
    const auto ds = testing::random_dataset(rng, 10, 2);
    auto rep = certify_report(TheoremId::RobustStd, ds, NoiseModel(1), IsotropicPrior(0.1), DataDistributionSpec(1, 0.5),
                              PerturbationBudget(0.1, 0), 0.05);
    rep.inputs_digest = "abc";
    const auto back = round_trip(rep);
    CHECK(back.bound_value == rep.bound_value);
    CHECK(back.theorem_id == TheoremId::RobustStd);
    CHECK(back.components.v_quad_term == rep.components.v_quad_term);
    CHECK(back.preconditions.size() == rep.preconditions.size());
    CHECK(back.inputs_digest == "abc");
    CHECK(back.cgf_s_sq == rep.cgf_s_sq);

    const auto bad = certify_report(TheoremId::BayesStd, ds, NoiseModel(1), IsotropicPrior(5), DataDistributionSpec(1, 0),
                                    PerturbationBudget(0, 0), 0.05);
    const auto j = io::to_json(bad);
    CHECK(j["bound_value"].is_null());
    CHECK(j["status"] == "certified");
    CHECK(std::isnan(round_trip(bad).bound_value));
}

TEST_CASE("certificate CSV row has one field per header column")
{
    std::mt19937_64 rng(3);
    const auto ds = testing::random_dataset(rng, 10, 2);
    const auto rep = certify_report(TheoremId::BayesStd, ds, NoiseModel(1), IsotropicPrior(0.1),
                                    DataDistributionSpec(1, 0.5), PerturbationBudget(0, 0), 0.05);
    const auto header = io::certificate_csv_header();
    const auto row = io::certificate_csv_row(rep);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(io::format_double(0.1) == "0.1");
}
