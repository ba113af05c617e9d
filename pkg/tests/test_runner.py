"""Registries, run matrix execution, and manifest loading.

Parallel execution must be a pure performance knob: the assembled
document, and therefore its serialized bytes, cannot depend on the job
count.  Registry mutations are snapshotted and restored so the builtin
catalogs stay pristine for other tests.
"""

import io
import json
import re
import struct

import pytest

from rngts import runner
from rngts.battery.base import TestCase as BatteryCase
from rngts.battery.uniformity import ChisqrUniformityTest, GapTest
from rngts.errors import ConfigurationError
from rngts.genkit.engines import Minstd, Mt19937
from rngts.report import write_xml
from rngts.runner import (
    RunManifest,
    RunMatrix,
    document_has_failures,
    generator_names,
    load_manifest,
    register_generator,
    register_test,
    resolve_generator,
    resolve_test,
    run_suite,
    test_names as catalog_test_names,
)

ALL_TESTS = [
    "chisqr_uniformity_test", "ks_uniformity_test", "gap_test",
    "serial_test", "poker_test", "coupon_collector_test",
    "permutation_test", "runs_test", "max_of_t_test", "collision_test",
    "serial_correlation_test", "birthday_spacings_test",
    "binary_rank_test", "parking_lot_test", "minimum_distance_test",
    "squeeze_test", "craps_test", "random_walk_test", "repetition_test",
    "gcd_test", "maurers_universal_test", "monkey_20bit_test",
]

ALL_GENERATORS = [
    "ecuyer1988", "lagged_fibonacci_1279", "minstd", "mt19937", "randu",
    "shuffled_minstd",
]


@pytest.fixture
def pristine_registries():
    saved = (dict(runner._GENERATORS), list(runner._GENERATOR_CANON),
             dict(runner._TESTS), list(runner._TEST_CANON))
    yield
    runner._GENERATORS.clear()
    runner._GENERATORS.update(saved[0])
    runner._GENERATOR_CANON[:] = saved[1]
    runner._TESTS.clear()
    runner._TESTS.update(saved[2])
    runner._TEST_CANON[:] = saved[3]


class TestRegistries:
    def test_builtin_catalogs(self):
        assert generator_names() == ALL_GENERATORS
        assert catalog_test_names() == sorted(ALL_TESTS)

    def test_aliases_resolve_but_stay_out_of_listings(self):
        assert resolve_generator("mt-19937") is resolve_generator("mt19937")
        assert "mt-19937" not in generator_names()
        assert resolve_test("gap") is resolve_test("gap_test")
        assert "gap" not in catalog_test_names()

    def test_unknown_names_list_the_catalog(self):
        with pytest.raises(ConfigurationError) as exc:
            resolve_generator("xorshift")
        assert "mt19937" in str(exc.value)
        with pytest.raises(ConfigurationError) as exc:
            resolve_test("entropy")
        assert "gap_test" in str(exc.value)

    def test_duplicate_registration_rejected(self, pristine_registries):
        register_generator("custom_gen", Minstd)
        with pytest.raises(ConfigurationError, match="already registered"):
            register_generator("custom_gen", Minstd)
        with pytest.raises(ConfigurationError, match="already registered"):
            register_generator("other", Minstd, aliases=("custom_gen",))
        register_test("custom_test", ChisqrUniformityTest)
        with pytest.raises(ConfigurationError, match="already registered"):
            register_test("custom_test", ChisqrUniformityTest)

    def test_custom_registration_resolves(self, pristine_registries):
        register_generator("custom_gen", Minstd, aliases=("cg",))
        assert resolve_generator("cg") is Minstd
        assert "custom_gen" in generator_names()


class TestRunMatrixValidation:
    def _matrix(self, **kw):
        base = dict(
            generators=(("mt19937", Mt19937, 0),),
            seeds=(1,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=2000, k=64),),
        )
        base.update(kw)
        return RunMatrix(**base)

    def test_valid(self):
        self._matrix()

    @pytest.mark.parametrize("field, value", [
        ("generators", ()),
        ("seeds", ()),
        ("levels", ()),
        ("tests", ()),
    ])
    def test_empty_axes_rejected(self, field, value):
        with pytest.raises(ConfigurationError):
            self._matrix(**{field: value})

    def test_duplicate_generator_names_rejected(self):
        with pytest.raises(ConfigurationError, match="unique"):
            self._matrix(generators=(("g", Mt19937, 0), ("g", Minstd, 0)))

    def test_negative_warmup_rejected(self):
        with pytest.raises(ConfigurationError, match="warmup"):
            self._matrix(generators=(("g", Mt19937, -1),))

    def test_negative_seed_rejected(self):
        with pytest.raises(ConfigurationError, match="seeds"):
            self._matrix(seeds=(3, -1))

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.2, 1.7])
    def test_levels_outside_unit_interval_rejected(self, level):
        with pytest.raises(ConfigurationError, match="level"):
            self._matrix(levels=(level,))


def _small_matrix():
    return RunMatrix(
        generators=(("mt19937", Mt19937, 0), ("minstd", Minstd, 16)),
        seeds=(1, 331),
        levels=(0.05, 0.95),
        tests=(
            lambda: ChisqrUniformityTest(n=4000, k=64),
            lambda: GapTest(alpha=0.0, beta=0.5, t=8, n_gaps=500),
        ),
    )


class TestRunSuite:
    def test_document_shape_follows_matrix_order(self):
        doc = run_suite(_small_matrix(), date="2025-06-01")
        assert [g.name for g in doc.generators] == ["mt19937", "minstd"]
        assert [g.warmup for g in doc.generators] == ["0", "16"]
        for g in doc.generators:
            assert [s.seed for s in g.seeds] == ["1", "331"]
            for s in g.seeds:
                assert [t.name for t in s.tests] == [
                    "Chi-Square-Uniformity-Test", "Gap-Test"]

    def test_job_count_does_not_change_the_bytes(self):
        serial = io.BytesIO()
        threaded = io.BytesIO()
        write_xml(run_suite(_small_matrix(), jobs=1, date="2025-06-01"),
                  serial)
        write_xml(run_suite(_small_matrix(), jobs=8, date="2025-06-01"),
                  threaded)
        assert serial.getvalue() == threaded.getvalue()

    def test_warmup_discards_before_the_test(self):
        matrix = RunMatrix(
            generators=(("mt19937", Mt19937, 64),),
            seeds=(9,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=2000, k=64),),
        )
        doc = run_suite(matrix, date="2025-06-01")
        stream = Mt19937(9)
        stream.next_block(64)
        direct = ChisqrUniformityTest(n=2000, k=64).execute(stream, [0.05])
        got = dict(doc.generators[0].seeds[0].tests[0].analyses[0].attributes)
        assert got["chi2"] == "%.6g" % direct.results[0].statistic_value

    def test_progress_reports_every_cell(self):
        calls = []
        run_suite(_small_matrix(),
                  progress=lambda name, seed, out: calls.append(
                      (name, seed, out.test_name)),
                  date="2025-06-01")
        assert len(calls) == 8
        assert calls[0] == (
            "mt19937", 1, "Chi-Square-Uniformity-Test")
        assert calls[-1] == ("minstd", 331, "Gap-Test")

    def test_cell_failure_is_contained(self, tmp_path):
        def broken():
            raise ConfigurationError("backing store vanished")

        matrix = RunMatrix(
            generators=(("broken", broken, 0), ("mt19937", Mt19937, 0)),
            seeds=(1,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=2000, k=64),),
        )
        doc = run_suite(matrix, date="2025-06-01")
        aborted = doc.generators[0].seeds[0].tests[0]
        healthy = doc.generators[1].seeds[0].tests[0]
        assert aborted.aborted == "backing store vanished"
        assert aborted.analyses == ()
        assert healthy.aborted is None and healthy.analyses

    def test_short_file_generator_aborts_cell(self, tmp_path):
        path = tmp_path / "short.bin"
        path.write_bytes(struct.pack("<50I", *range(50)))
        matrix = RunMatrix(
            generators=(("short", lambda: runner.file_stream(str(path)), 0),),
            seeds=(1,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=2000, k=64),),
        )
        doc = run_suite(matrix, date="2025-06-01")
        section = doc.generators[0].seeds[0].tests[0]
        assert section.aborted and "exhausted" in section.aborted

    def test_preflight_rejects_bad_test_configuration(self):
        calls = []
        matrix = RunMatrix(
            generators=(("mt19937", Mt19937, 0),),
            seeds=(1,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=10, k=256),),
        )
        with pytest.raises(ConfigurationError, match="below 5"):
            run_suite(matrix, progress=lambda *a: calls.append(a))
        assert calls == []

    def test_jobs_floor(self):
        with pytest.raises(ConfigurationError, match="jobs"):
            run_suite(_small_matrix(), jobs=0)

    def test_default_date_is_today_iso(self):
        matrix = RunMatrix(
            generators=(("mt19937", Mt19937, 0),),
            seeds=(1,),
            levels=(0.05,),
            tests=(lambda: ChisqrUniformityTest(n=2000, k=64),),
        )
        doc = run_suite(matrix)
        assert re.fullmatch(r"\d{4}-\d{2}-\d{2}", doc.date)


class TestDocumentHasFailures:
    def _doc(self, verdicts):
        from rngts.report import (AnalysisSection, ReportDocument,
                                  RngSection, SeedSection, TestSection)
        return ReportDocument(date="2025-06-01", generators=(
            RngSection(name="g", warmup="0", seeds=(
                SeedSection(seed="1", tests=(
                    TestSection(name="t", analyses=(
                        AnalysisSection(element="GAUSSIAN",
                                        attributes=(("value", "0"),),
                                        verdicts=verdicts),
                    )),
                )),
            )),
        ))

    def test_all_passed(self):
        doc = self._doc((("PASSED", "0.05"), ("PASSED", "0.95")))
        assert not document_has_failures(doc)

    def test_one_failed(self):
        doc = self._doc((("PASSED", "0.05"), ("FAILED", "0.95")))
        assert document_has_failures(doc)

    def test_no_verdicts_at_all(self):
        assert not document_has_failures(self._doc(()))


class TestLoadManifest:
    def _write(self, tmp_path, data):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(data))
        return str(path)

    def _base(self):
        return {
            "generators": [{"name": "mt-19937"},
                           {"name": "minstd", "warmup": 100}],
            "seeds": [331, 42],
            "levels": [0.05, 0.95],
            "tests": [
                {"name": "chisqr_uniformity",
                 "parameters": {"n": 2000, "k": 64}},
                {"name": "gap_test"},
            ],
        }

    def test_happy_path(self, tmp_path):
        data = self._base()
        data.update(output="out.xml", html="out.html", jobs=4)
        manifest = load_manifest(self._write(tmp_path, data))
        assert isinstance(manifest, RunManifest)
        matrix = manifest.matrix
        assert [g[0] for g in matrix.generators] == ["mt-19937", "minstd"]
        assert [g[2] for g in matrix.generators] == [0, 100]
        assert matrix.seeds == (331, 42)
        assert matrix.levels == (0.05, 0.95)
        case = matrix.tests[0]()
        assert isinstance(case, ChisqrUniformityTest)
        assert (case.n, case.k) == (2000, 64)
        assert isinstance(matrix.tests[1](), GapTest)
        assert manifest.output == "out.xml"
        assert manifest.html == "out.html"
        assert manifest.jobs == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="manifest"):
            load_manifest(str(tmp_path / "absent.json"))

    def test_malformed_json_mentions_path(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        with pytest.raises(ConfigurationError, match="bad.json"):
            load_manifest(str(path))

    def test_root_must_be_object(self, tmp_path):
        path = tmp_path / "arr.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError, match="object"):
            load_manifest(str(path))

    @pytest.mark.parametrize("key", ["generators", "seeds", "levels",
                                     "tests"])
    def test_required_arrays(self, tmp_path, key):
        data = self._base()
        del data[key]
        with pytest.raises(ConfigurationError, match=key):
            load_manifest(self._write(tmp_path, data))
        data = self._base()
        data[key] = []
        with pytest.raises(ConfigurationError, match=key):
            load_manifest(self._write(tmp_path, data))

    def test_bad_seed(self, tmp_path):
        data = self._base()
        data["seeds"] = ["ten"]
        with pytest.raises(ConfigurationError, match="seed"):
            load_manifest(self._write(tmp_path, data))
        data["seeds"] = [-4]
        with pytest.raises(ConfigurationError, match="seed"):
            load_manifest(self._write(tmp_path, data))

    def test_bad_level(self, tmp_path):
        data = self._base()
        data["levels"] = [1.5]
        with pytest.raises(ConfigurationError, match="level"):
            load_manifest(self._write(tmp_path, data))

    def test_bad_jobs_and_output_types(self, tmp_path):
        data = self._base()
        data["jobs"] = 0
        with pytest.raises(ConfigurationError, match="jobs"):
            load_manifest(self._write(tmp_path, data))
        data = self._base()
        data["output"] = 7
        with pytest.raises(ConfigurationError, match="output"):
            load_manifest(self._write(tmp_path, data))

    def test_unknown_test_name(self, tmp_path):
        data = self._base()
        data["tests"] = [{"name": "entropy_test"}]
        with pytest.raises(ConfigurationError, match="unknown test"):
            load_manifest(self._write(tmp_path, data))

    def test_unknown_test_parameter(self, tmp_path):
        data = self._base()
        data["tests"] = [{"name": "gap_test",
                          "parameters": {"gamma": 3}}]
        with pytest.raises(ConfigurationError, match="gap_test"):
            load_manifest(self._write(tmp_path, data))

    def test_parameters_must_be_object(self, tmp_path):
        data = self._base()
        data["tests"] = [{"name": "gap_test", "parameters": [1, 2]}]
        with pytest.raises(ConfigurationError, match="parameters"):
            load_manifest(self._write(tmp_path, data))

    def test_generator_entry_shape(self, tmp_path):
        data = self._base()
        data["generators"] = ["mt19937"]
        with pytest.raises(ConfigurationError, match="name"):
            load_manifest(self._write(tmp_path, data))
        data["generators"] = [{"name": "mt19937", "warmup": -1}]
        with pytest.raises(ConfigurationError, match="warmup"):
            load_manifest(self._write(tmp_path, data))

    def test_file_generator(self, tmp_path):
        words = tmp_path / "words.bin"
        words.write_bytes(struct.pack("<4I", 1, 2, 3, 4))
        data = self._base()
        data["generators"] = [{"name": "file", "path": str(words)}]
        manifest = load_manifest(self._write(tmp_path, data))
        label, factory, warmup = manifest.matrix.generators[0]
        assert label == f"file:{words}"
        stream = factory()
        assert list(stream.next_block(4)) == [1, 2, 3, 4]
        stream.close()

    def test_file_generator_custom_label_and_missing_path(self, tmp_path):
        words = tmp_path / "w.bin"
        words.write_bytes(struct.pack("<1I", 9))
        data = self._base()
        data["generators"] = [
            {"name": "file", "path": str(words), "label": "tape-a"}]
        manifest = load_manifest(self._write(tmp_path, data))
        assert manifest.matrix.generators[0][0] == "tape-a"
        data["generators"] = [{"name": "file"}]
        with pytest.raises(ConfigurationError, match="path"):
            load_manifest(self._write(tmp_path, data))

    def test_external_generator(self, tmp_path):
        data = self._base()
        data["generators"] = [
            {"name": "external", "command": ["python3", "-c", "pass"]}]
        manifest = load_manifest(self._write(tmp_path, data))
        assert manifest.matrix.generators[0][0] == "external:python3"
        data["generators"] = [{"name": "external", "command": "python3"}]
        with pytest.raises(ConfigurationError, match="command"):
            load_manifest(self._write(tmp_path, data))
        data["generators"] = [{"name": "external", "command": []}]
        with pytest.raises(ConfigurationError, match="command"):
            load_manifest(self._write(tmp_path, data))

    def test_loaded_manifest_runs(self, tmp_path):
        manifest = load_manifest(self._write(tmp_path, self._base()))
        doc = run_suite(manifest.matrix, date="2025-06-01")
        assert len(doc.generators) == 2
        assert not any(
            t.aborted for g in doc.generators for s in g.seeds
            for t in s.tests
        )
