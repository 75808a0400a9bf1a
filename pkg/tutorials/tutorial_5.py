"""
This script shows how to load a scenario file and run the checks of the gck
command from python.
"""
# %%
## Import modules
from pathlib import Path
from gaugecheck.cli import run_command
from gaugecheck.scenario import load_scenario, parse_scenario, ScenarioError

resources = Path(__file__).parent.parent / "tests" / "resources"

# %%
## Load a scenario and run a command
scenario = load_scenario(resources / "orthonormal.gck")
report = run_command("bundle-check", scenario)
print(report.summarize())

# %%
## Reports render as tab separated records and export to CSV
print(report.render())
report.export("bundle_checks.csv")

# %%
## Scenarios can also be given as text
text = """
[chart]
x1 = 0.5, 1.5
samples = 20

[metric]
g22 = -x1^2
"""
report = run_command("gamma", parse_scenario(text))
for name, key, value in report.values:
    if value != "0":
        print(key, value)

# %%
## Problems are reported with their line and column
try:
    parse_scenario("[frame]\nY11 = x1 +\n")
except ScenarioError as error:
    for issue in error.issues:
        print(issue)
