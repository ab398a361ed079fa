import json
import pickle
import unittest

from pydantic import ValidationError

from cache_manager import CacheManager, algebra_cache
from config import Config
from exceptions import LemmaViolated, NotInMOddSpan, TheoremViolated
from schemas import Campaign, CampaignSummary, PolyPayload, ReportRow, SeriesPayload


class TestSchemas(unittest.TestCase):
    def test_campaign_targets(self):
        self.assertEqual(Campaign(target="kernel").campaign_id, "verify:kernel")
        self.assertEqual(Campaign(command="emit", target="theta").campaign_id, "emit:theta")
        with self.assertRaises(ValidationError):
            Campaign(command="emit", target="kernel")
        with self.assertRaises(ValidationError):
            Campaign(target="everything")

    def test_campaign_fields(self):
        self.assertEqual(Campaign(target="hecke-u", primes=[3, 7, 11]).primes, [3, 7, 11])
        bad_values = (
            {"primes": [9]}, {"primes": [2]}, {"primes": [5]}, {"primes": [1]}, {"primes": [13, 15]},
            {"threads": 0}, {"format": "xml"}, {"normalization": "other"},
        )
        for bad in bad_values:
            with self.assertRaises(ValidationError):
                Campaign(target="hecke-u", **bad)

    def test_start_within_range(self):
        self.assertEqual(Campaign(target="kernel", max_n=100, start=50).start, 50)
        self.assertEqual(Campaign(target="projection", max_n=5, max_m=20, start=10).start, 10)
        for bad in ({"target": "kernel", "max_n": 10, "start": 11}, {"target": "projection", "max_m": 3, "start": 4}):
            with self.assertRaises(ValidationError):
                Campaign(**bad)

    def test_report_row(self):
        row = ReportRow(campaign="verify:kernel", item=6, status="pass", witness={"S": [3, 4, 5]}, ms=1.5)
        self.assertEqual(json.loads(row.to_record())["ms"], 1.5)
        self.assertNotIn("ms", json.loads(row.to_record(with_timing=False)))
        with self.assertRaises(ValidationError):
            ReportRow(campaign="c", item=0, status="skipped")

    def test_payloads(self):
        self.assertEqual(PolyPayload(exponents=[0, 5]).exponents, [0, 5])
        with self.assertRaises(ValidationError):
            PolyPayload(exponents=[5, 0])
        with self.assertRaises(ValidationError):
            SeriesPayload(exponents=[4], precision=4)

    def test_summary(self):
        self.assertTrue(CampaignSummary(campaign="c", total=3, passed=3, failed=0, seconds=0.1).ok)
        self.assertFalse(CampaignSummary(campaign="c", total=3, passed=2, failed=1, seconds=0.1).ok)


class TestConfig(unittest.TestCase):
    def test_validate(self):
        class Bad(Config):
            THREADS = 0
            REPORT_FORMAT = "xml"
            ADAPTED_START_N = 10000

        problems = Bad.validate()
        self.assertEqual(len(problems), 3)

    def test_defaults_are_valid(self):
        class Defaults(Config):
            THREADS = 1
            KARATSUBA_THRESHOLD = 4096
            ADAPTED_START_N = 48
            ADAPTED_MAX_N = 6144
            REPORT_FORMAT = "text"

        self.assertEqual(Defaults.validate(), [])


class TestErrors(unittest.TestCase):
    def test_witness(self):
        error = TheoremViolated("C_9 is dependent", {"n": 9, "echelon_hash": "ab"})
        self.assertEqual(error.to_witness(), {"error": "theorem_violated", "detail": "C_9 is dependent", "n": 9, "echelon_hash": "ab"})

    def test_errors_survive_pickling(self):
        error = pickle.loads(pickle.dumps(NotInMOddSpan(41, "degree", {"dmax": 10})))
        self.assertEqual((error.exponent, error.reason), (41, "degree"))
        self.assertEqual(error.certificate["dmax"], 10)
        error = pickle.loads(pickle.dumps(LemmaViolated("window", {"n": 6})))
        self.assertEqual(error.to_witness()["n"], 6)


class TestCache(unittest.TestCase):
    def test_grow_extends_in_place(self):
        cache = CacheManager("test", max_size=4)
        table = cache.grow("squares", lambda: [0], 5, lambda t, size: t.extend(n * n for n in range(len(t), size)))
        self.assertEqual(table, [0, 1, 4, 9, 16])
        self.assertIs(cache.grow("squares", lambda: [], 3, None), table)

    def test_eviction(self):
        cache = CacheManager("test", max_size=2)
        for key in ("a", "b", "c"):
            cache.set(key, key)
        self.assertEqual(cache.get_stats()["total_items"], 2)
        self.assertEqual(cache.get_or_build("d", lambda: 4), 4)

    def test_algebra_cache_stats(self):
        names = [stats["name"] for stats in algebra_cache.get_cache_stats()]
        self.assertEqual(names, ["tables", "sequences", "bases", "series"])


if __name__ == "__main__":
    unittest.main()
