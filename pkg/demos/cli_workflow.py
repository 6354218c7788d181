"""End-to-end command-line workflow on a small scenario.

Writes a scenario file, runs `solve` to produce the policy, trace, and
summary artifacts, then runs `verify` on the emitted policy to check
its optimality structure. Everything lands in a temporary directory and
the generated files are listed with a peek at the summary and report.
"""

import os
import tempfile

from coopmac.cli import main as coopmac


def run(argv) -> None:
    print(f"$ coopmac {' '.join(argv)}")
    status = coopmac(argv)
    print(f"  -> exit {status}\n")


def main() -> None:
    with tempfile.TemporaryDirectory() as workdir:
        scenario = os.path.join(workdir, "demo.scn")
        with open(scenario, "w", encoding="utf-8") as handle:
            handle.write(
                "kind = uniform\n"
                "direct_values = 0.1:0.3:0.1\n"
                "inter_values = 0.5, 0.8\n"
                "max_iters = 500\n"
                "step_a = 5.0\n"
                "step_b = 1.0\n"
            )
        out = os.path.join(workdir, "artifacts")

        # the structural checks in `verify` target sum-rate optima, so
        # solve with equal weights
        run(["solve", "--scenario", scenario, "--mu", "1,1",
             "--out", out])
        policy = os.path.join(out, "policy_demo_CoopPowerControl_mu1_1.csv")
        run(["verify", "--scenario", scenario, "--policy", policy,
             "--slice", "0.1,0.1", "--out", out])

        print("artifacts written:")
        for name in sorted(os.listdir(out)):
            print(f"  {name}")

        print("\nsummary_demo_CoopPowerControl_mu1_1.txt:")
        summary = os.path.join(out, "summary_demo_CoopPowerControl_mu1_1.txt")
        with open(summary, encoding="utf-8") as handle:
            for line in handle:
                print(f"  {line.rstrip()}")

        print("\nreport_demo_s0.1_0.1.txt:")
        with open(os.path.join(out, "report_demo_s0.1_0.1.txt"),
                  encoding="utf-8") as handle:
            for line in handle:
                print(f"  {line.rstrip()}")


if __name__ == "__main__":
    main()
