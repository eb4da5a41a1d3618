"""Tests for the flat key-value configuration format."""

import pytest

from bgmatte.config import (
    ConfigError,
    PipelineConfig,
    describe_keys,
    load_config,
    parse_config,
    replace,
    save_config,
    to_synth_config,
)


class TestDefaults:
    def test_empty_text_gives_documented_defaults(self):
        cfg = parse_config("")
        assert cfg.prm_xi == 0.01
        assert cfg.prm_cap == 0.15
        assert cfg.losses_eps == 1e-6
        assert cfg.predictor == "classical"
        assert cfg.semantic_theta == 0.1
        assert cfg.semantic_sigma == 0.02

    def test_empty_file_loads(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        assert load_config(path) == PipelineConfig()


class TestParsing:
    def test_reads_each_value_kind(self):
        cfg = parse_config(
            "\n".join(
                [
                    'predictor = "classical"',
                    "prm.xi = 0.25",
                    "prm.halo = 12",
                    "ofd.enabled = true",
                    "synth.bg_velocity = 1.5, -0.5",
                    "synth.fg_color = 0.1, 0.2, 0.3",
                ]
            )
        )
        assert cfg.prm_xi == 0.25
        assert cfg.prm_halo == 12
        assert cfg.ofd_enabled is True
        assert cfg.synth_bg_velocity == (1.5, -0.5)
        assert cfg.synth_fg_color == (0.1, 0.2, 0.3)

    def test_comments_and_blanks_are_skipped(self):
        cfg = parse_config("# a comment\n\nprm.xi = 0.5  # trailing note\n")
        assert cfg.prm_xi == 0.5

    def test_hash_inside_quotes_is_kept(self):
        cfg = parse_config('io.output = "out#1"\n')
        assert cfg.io_output == "out#1"

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ConfigError, match=r"<config>:3: unknown key 'prm\.xl'"):
            parse_config("\n\nprm.xl = 0.5\n")

    def test_missing_equals_reports_line(self):
        with pytest.raises(ConfigError, match=r"<config>:2: expected 'key = value'"):
            parse_config("prm.xi = 0.5\nprm.cap 0.3\n")

    def test_bad_number_reports_key(self):
        with pytest.raises(ConfigError, match=r"bad value for prm\.xi"):
            parse_config("prm.xi = lots\n")

    def test_unquoted_string_rejected(self):
        with pytest.raises(ConfigError, match="double-quoted"):
            parse_config("predictor = classical\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_config("prm.xi = 0.1\nprm.xi = 0.2\n")

    def test_wrong_tuple_arity_rejected(self):
        with pytest.raises(ConfigError, match="expected 2 comma-separated"):
            parse_config("synth.bg_velocity = 1.0, 2.0, 3.0\n")


class TestRanges:
    def test_xi_above_one_names_key(self):
        with pytest.raises(ConfigError, match=r"prm\.xi must be in \[0, 1\]"):
            parse_config("prm.xi = 2.0\n")

    def test_negative_halo_names_key(self):
        with pytest.raises(ConfigError, match=r"prm\.halo"):
            parse_config("prm.halo = -1\n")

    def test_sigma_zero_rejected(self):
        with pytest.raises(ConfigError, match=r"semantic\.sigma"):
            parse_config("semantic.sigma = 0.0\n")

    def test_band_order_enforced(self):
        with pytest.raises(ConfigError, match=r"band\.lo must be < band\.hi"):
            parse_config("band.lo = 0.9\nband.hi = 0.1\n")

    def test_constructor_validates_too(self):
        with pytest.raises(ConfigError, match=r"prm\.cap"):
            PipelineConfig(prm_cap=1.5)

    def test_bad_shape_names_key(self):
        with pytest.raises(ConfigError, match=r"synth\.fg_shape"):
            parse_config('synth.fg_shape = "square"\n')


class TestRoundTrip:
    def test_save_then_load_is_identity(self, tmp_path):
        cfg = PipelineConfig(
            prm_xi=0.125,
            prm_cap=0.0625,
            ofd_enabled=True,
            synth_bg_velocity=(1.25, -0.75),
            synth_fg_shape="capsule",
            io_input="frames",
            io_output="mattes",
            losses_eps=3e-7,
        )
        path = tmp_path / "echo.cfg"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_default_round_trip(self, tmp_path):
        path = tmp_path / "defaults.cfg"
        save_config(PipelineConfig(), path)
        assert load_config(path) == PipelineConfig()

    def test_echo_mentions_every_key(self, tmp_path):
        path = tmp_path / "echo.cfg"
        save_config(PipelineConfig(), path)
        text = path.read_text()
        for key in describe_keys():
            assert f"{key} = " in text


class TestHelpers:
    def test_to_synth_config_carries_fields(self):
        cfg = replace(PipelineConfig(), synth_width=64, synth_height=32, synth_seed=7)
        sc = to_synth_config(cfg)
        assert (sc.width, sc.height, sc.seed) == (64, 32, 7)

    def test_seed_override_wins(self):
        sc = to_synth_config(PipelineConfig(), seed=99)
        assert sc.seed == 99

    def test_replace_rejects_unknown_attribute(self):
        with pytest.raises(ConfigError, match="unknown config attributes"):
            replace(PipelineConfig(), prm_xl=0.5)
