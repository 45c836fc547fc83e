#!/usr/bin/env python3
# Grow best-first decision trees under different leaf budgets and watch
# training accuracy climb as the budget loosens.

from domepilot import ConditionTable, SplitSpec, TreeConfig, split, to_samples, train_tree
from domepilot.synthetic import synthetic_observations
from domepilot.tree import Leaf, Split

samples, _ = to_samples(synthetic_observations(3000, seed=2), ConditionTable.builtin())
train_set, test_set = split(samples, SplitSpec(0.33, 324))
print(f"{len(train_set)} training / {len(test_set)} test samples\n")


def accuracy(model, rows):
    return sum(model.predict(s.features) == s.label for s in rows) / len(rows)


print("budget  leaves  train acc  test acc")
for budget in (1, 2, 5, 10, 50):
    model = train_tree(train_set, TreeConfig(max_leaf_nodes=budget))
    print(f"{budget:>6}  {model.leaf_count:>6}  {accuracy(model, train_set):>9.4f}"
          f"  {accuracy(model, test_set):>8.4f}")

# Print the structure of a small tree: which feature it asks about first
# tells you what actually drives the dome state.
names = ("temp", "wind", "humidity", "hour", "visibility", "barometer")
model = train_tree(train_set, TreeConfig(max_leaf_nodes=5))
print("\n5-leaf tree:")


def show(node_id, indent=""):
    node = model.nodes[node_id]
    if isinstance(node, Leaf):
        print(f"{indent}leaf: predict {node.label} (counts {node.counts})")
    else:
        print(f"{indent}{names[node.feature]} <= {node.threshold:g}? (n={node.n})")
        show(node.left, indent + "  ")
        show(node.right, indent + "  ")


show(0)
