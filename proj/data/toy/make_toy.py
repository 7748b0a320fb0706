#!/usr/bin/env python3
"""Regenerates the bundled toy scene/caption corpus (deterministic)."""
import random

rng = random.Random(7)

PEOPLE = ["jenny", "mike"]
OBJECTS = ["ball", "owl", "pie", "hat", "dog", "bear", "tree", "sun"]
HELD = ["ball", "owl", "pie", "hat"]
MOODS = ["happy", "sad", "surprised"]

# Feature layout (dim 32):
#   0-1   person present        2-9   object present
#   10-13 held object           14-19 person x mood
#   20-23 object left/right bin for ball/dog/bear/tree
#   24-31 noise features
DIM = 32

def scene(i):
    person = rng.choice(PEOPLE)
    mood = rng.choice(MOODS)
    held = rng.choice(HELD) if rng.random() < 0.7 else None
    others = rng.sample([o for o in OBJECTS if o != held], 2)
    feats = {PEOPLE.index(person): 1.0, 14 + 3 * PEOPLE.index(person) + MOODS.index(mood): 1.0}
    for o in others + ([held] if held else []):
        feats[2 + OBJECTS.index(o)] = 1.0
    if held:
        feats[10 + HELD.index(held)] = 1.0
    for k, o in enumerate(["ball", "dog", "bear", "tree"]):
        if o in others:
            feats[20 + k] = float(rng.choice([1, 2]))
    for k in rng.sample(range(24, 32), 2):
        feats[k] = round(rng.uniform(0.1, 1.0), 2)

    caps = []
    if held:
        caps.append(f"{person} is holding the {held}.")
        caps.append(f"{person} has a {held}.")
    caps.append(f"{person} is {mood}.")
    caps.append(f"the {others[0]} is near {person}.")
    if rng.random() < 0.5:
        caps.append(f"{person} is {mood} and the {others[1]} is near.")
    if others[1] == "sun" or others[0] == "sun":
        caps.append("the sun is in the sky.")
    if rng.random() < 0.3:
        caps.append(f"{person.capitalize()} sees the {others[1]}.")
    return f"s{i:03d}", feats, caps

def main():
    scenes = [scene(i) for i in range(40)]
    with open("features.tsv", "w") as f:
        for sid, feats, _ in scenes:
            items = " ".join(f"{k}:{v:g}" for k, v in sorted(feats.items()))
            f.write(f"{sid}\t{items}\n")
    with open("captions.tsv", "w") as f:
        for sid, _, caps in scenes:
            for c in caps:
                f.write(f"{sid}\t{c}\n")
    with open("manifest.tsv", "w") as f:
        for k, (sid, _, _) in enumerate(scenes):
            split = "train" if k < 28 else ("dev" if k < 34 else "test")
            f.write(f"{sid}\t{split}\n")

if __name__ == "__main__":
    main()
