"""CLI contract: subcommand artifact sets, exit codes and flag precedence."""

import json
import pathlib
import subprocess
import sys
import tempfile


def run(*args):
    return subprocess.run([str(a) for a in args], capture_output=True, text=True)


def main() -> int:
    cli = sys.argv[1]
    problems = []

    def expect(cond, what):
        if not cond:
            problems.append(what)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        corpus = tmp / "corpus"
        r = run(cli, "synth", "--out-dir", corpus, "--seed", "3", "--n-trials", "6")
        expect(r.returncode == 0, f"synth exit {r.returncode}: {r.stderr}")

        r = run(cli, "build-aois", "--input-dir", corpus, "--out-dir", tmp / "all")
        expect(r.returncode == 0, f"build-aois exit {r.returncode}: {r.stderr}")
        for name in ["aois_by_trial_id_typed.csv", "aois_by_trial_id_typed_gapfill.csv",
                     "aois_by_trial_id_organic_hybrid.csv", "inventory.csv", "inventory.json",
                     "position_click_rates.json", "ad_consistency.json", "gaze_cursor_coverage.json",
                     "dropped_trials.csv", "provenance.json"]:
            expect((tmp / "all" / name).is_file(), f"build-aois missing {name}")
        expect(len(list((tmp / "all" / "trials").glob("*.json"))) == 6, "build-aois trial JSONs")

        r = run(cli, "build-aois", "--input-dir", corpus, "--out-dir", tmp / "one",
                "--flavor", "typed")
        expect(r.returncode == 0, "single flavor run")
        expect((tmp / "one" / "aois_by_trial_id_typed.csv").is_file(), "typed CSV missing")
        expect(not (tmp / "one" / "aois_by_trial_id_organic_hybrid.csv").exists(),
               "--flavor typed still wrote the hybrid CSV")

        r = run(cli, "audit", "--input-dir", corpus, "--out-dir", tmp / "audit")
        expect(r.returncode == 0, "audit run")
        expect((tmp / "audit" / "ad_consistency.json").is_file(), "audit report missing")
        expect(not (tmp / "audit" / "trials").exists(), "audit wrote trial JSONs")

        # Flags override the config file, which overrides defaults.
        cfg = tmp / "cfg.json"
        cfg.write_text(json.dumps({"version": 1, "segmentation": {"activity_threshold": 5.0,
                                                                  "min_gap_rows": 9}}))
        r = run(cli, "inventory", "--input-dir", corpus, "--out-dir", tmp / "prec",
                "--config", cfg, "--activity-threshold", "6")
        expect(r.returncode == 0, f"inventory exit {r.returncode}: {r.stderr}")
        prov = json.loads((tmp / "prec" / "provenance.json").read_text())
        seg = prov["config"]["segmentation"]
        expect(seg["activity_threshold"] == 6.0, f"flag did not win: {seg}")
        expect(seg["min_gap_rows"] == 9, f"config value lost: {seg}")
        expect(seg["min_card_height"] == 24, f"default lost: {seg}")

        bad_cfg = tmp / "bad.json"
        bad_cfg.write_text(json.dumps({"version": 1, "segmentaton": {}}))
        r = run(cli, "build-aois", "--input-dir", corpus, "--out-dir", tmp / "bad",
                "--config", bad_cfg)
        expect(r.returncode == 1, f"unknown config key exit {r.returncode}")

        # An unreadable screenshot is an ingest failure: run completes, exit 2.
        (corpus / "synth-0001" / "screenshot.png").write_bytes(b"not a png")
        r = run(cli, "build-aois", "--input-dir", corpus, "--out-dir", tmp / "fail")
        expect(r.returncode == 2, f"ingest failure exit {r.returncode}")
        dropped = (tmp / "fail" / "dropped_trials.csv").read_text().splitlines()
        expect(len(dropped) == 2 and "synth-0001" in dropped[1], f"dropped_trials.csv: {dropped}")

        r = run(cli, "build-aois", "--input-dir", tmp / "missing", "--out-dir", tmp / "x")
        expect(r.returncode != 0, "missing input dir accepted")

    for p in problems:
        print("problem:", p)
    print(f"{len(problems)} problem(s)")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
