#include <gtest/gtest.h>

#include <cstdlib>

#include "hetmimo/config.hpp"

using namespace hetmimo;

TEST(Presets, CellFreeShape) {
    const auto c = paradigm_preset(Preset::CellFree512);
    EXPECT_EQ(c.eap_count, 128);
    EXPECT_EQ(c.eap_antennas, 4);
    EXPECT_EQ(c.cbs_antennas, 0);
    EXPECT_EQ(c.total_antennas(), 512);
}

TEST(Presets, HeteroQuarterShape) {
    const auto c = paradigm_preset(Preset::HeteroQuarter);
    EXPECT_EQ(c.num_cells, 4);
    EXPECT_EQ(c.cbs_antennas, 32);
    EXPECT_EQ(c.eap_count, 24);
    EXPECT_EQ(c.eap_antennas, 4);
    EXPECT_EQ(c.antennas_per_cell(), 128);
}

TEST(Presets, CellularShape) {
    const auto c = paradigm_preset(Preset::Cellular512);
    EXPECT_EQ(c.num_cells, 4);
    EXPECT_EQ(c.cbs_antennas, 128);
    EXPECT_EQ(c.eap_count, 0);
    EXPECT_EQ(c.users_per_cell(), 8);
}

TEST(Presets, NoisePower) {
    const double expected = std::pow(10.0, (-174.0 + 10.0 * std::log10(5e6) + 9.0 - 30.0) / 10.0);
    for (const auto& [name, p] : preset_names()) {
        EXPECT_NEAR(paradigm_preset(p).noise_power, expected, 1e-25) << name;
    }
    EXPECT_NEAR(expected, 1.58e-13, 0.01e-13);
}

TEST(Presets, AllValidateAndConserveAntennas) {
    for (const auto& [name, p] : preset_names()) {
        const auto c = paradigm_preset(p);
        EXPECT_TRUE(validate(c).ok()) << name << "\n" << validate(c).to_string();
        EXPECT_EQ(c.total_antennas(), 512) << name;
        EXPECT_EQ(preset_from_name(name), p);
    }
    EXPECT_FALSE(preset_from_name("nope").has_value());
}

TEST(Validate, PilotLongerThanBlock) {
    auto c = paradigm_preset(Preset::HeteroQuarter);
    c.pilot_length = 250;
    const auto r = validate(c);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.mentions("τ_p < τ_c"));
}

TEST(Validate, TooFewPilots) {
    auto c = paradigm_preset(Preset::HeteroQuarter);
    c.users_total = 64;  // 16 per cell
    c.pilot_length = 8;
    const auto r = validate(c);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.mentions("τ_p ≥ users_per_cell"));
}

TEST(Validate, BadAngularSpread) {
    auto c = paradigm_preset(Preset::CellFree512);
    c.asd = 2.0;
    EXPECT_FALSE(validate(c).ok());
    c.asd = 0.0;
    EXPECT_FALSE(validate(c).ok());
}

TEST(Validate, NonSquareCellGrid) {
    auto c = paradigm_preset(Preset::HeteroHalf);
    c.num_cells = 3;
    EXPECT_FALSE(validate(c).ok());
}

TEST(TextFormat, RoundTrip) {
    for (const auto& [name, p] : preset_names()) {
        auto c = paradigm_preset(p);
        c.seed = 123456789012345ULL;
        c.asd = 0.123456789012345678;
        c.estimator_normalization = EstimatorNormalization::StandardMMSE;
        EXPECT_EQ(parse(render(c)), c) << name;
    }
}

TEST(TextFormat, CommentsAndErrors) {
    const auto c = parse("# comment\nepochs = 5  # trailing\n\nparadigm = cell_free\n", paradigm_preset(Preset::CellFree512));
    EXPECT_EQ(c.epochs, 5);
    EXPECT_EQ(c.paradigm, Paradigm::CellFree);
    EXPECT_THROW(parse("no_such_key = 1"), ConfigParseError);
    EXPECT_THROW(parse("epochs = many"), ConfigParseError);
    EXPECT_THROW(parse("epochs 5"), ConfigParseError);
    EXPECT_THROW(parse("paradigm = ring"), ConfigParseError);
}

TEST(TextFormat, EnvOverrides) {
    ::setenv("HETMIMO_EPOCHS", "17", 1);
    ::setenv("HETMIMO_ESTIMATOR_NORMALIZATION", "standard_mmse", 1);
    const auto c = apply_env_overrides(paradigm_preset(Preset::HeteroQuarter));
    ::unsetenv("HETMIMO_EPOCHS");
    ::unsetenv("HETMIMO_ESTIMATOR_NORMALIZATION");
    EXPECT_EQ(c.epochs, 17);
    EXPECT_EQ(c.estimator_normalization, EstimatorNormalization::StandardMMSE);
}
