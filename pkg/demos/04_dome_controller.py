#!/usr/bin/env python3
# Replay a synthetic day through the controller loop. The rain sensor is a
# hard override, the temperature gate is re-checked per frame, and the air
# conditioning runs exactly when the dome is closed.

import io

from domepilot import ConditionTable, TreeConfig, replay, to_samples, train_tree
from domepilot.synthetic import synthetic_frames, synthetic_observations

# A quick model to stand in for the trained classifier.
samples, _ = to_samples(synthetic_observations(2000, seed=6), ConditionTable.builtin())
model = train_tree(samples, TreeConfig())

frames = synthetic_frames(24, seed=12, rain_rate=0.15)
wire = io.StringIO()
log = replay(model.predict, frames, sink=wire)

print("tick  temp  condition             rain  pred  dome  ac  cause")
for entry in log:
    obs = entry.frame.observation
    pred = "-" if entry.prediction is None else entry.prediction
    print(f"{entry.frame.tick:>4}  {obs.temp:>4.0f}  {obs.condition:<20}"
          f"  {int(entry.frame.rain_detected):>4}  {pred:>4}"
          f"  {entry.command.dome:>4}  {entry.command.ac:>2}  {entry.command.cause}")

opened = sum(e.command.dome for e in log)
print(f"\n{opened}/{len(log)} frames opened the dome")

# Exactly one wire line per frame went to the actuator sink.
print("\nfirst five actuator lines:")
for line in wire.getvalue().splitlines()[:5]:
    print(f"  {line}")
