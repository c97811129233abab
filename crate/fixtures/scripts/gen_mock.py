# Writes the mock backend scripts and the expected report values derived
# from them. Run after gen_corpus.py.
import json, os, statistics
d = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..") + "/"
smelly = [json.loads(l) for l in open(d + "corpus/smelly.jsonl")]
clean = [json.loads(l) for l in open(d + "corpus/clean.jsonl")]
fence = lambda code: "```java\n" + code + "\n```"
echo = {"default": True, "output_text": fence("{{input_code}}"), "usage": {"prompt_tokens": 300, "reasoning_tokens": 900, "completion_tokens": 200}, "seconds": 20.0}

def write(name, entries):
    with open(d + "mock/" + name, "w") as f:
        for e in entries:
            f.write(json.dumps(e) + "\n")

# RQ1: evaluation usage and latency per sample
rq1, rates = [], {"smelly": [], "clean": []}
for group, samples, base in (("smelly", smelly, 900), ("clean", clean, 600)):
    for i, s in enumerate(samples):
        prompt, reasoning, completion = 150 + 10 * i, base + 37 * i, 40 + 3 * i
        seconds = 20.0 + 2.5 * i
        rq1.append({"match": {"sample": s["id"], "task": "evaluate"}, "output_text": "Score: 3",
                    "usage": {"prompt_tokens": prompt, "reasoning_tokens": reasoning, "completion_tokens": completion},
                    "seconds": seconds})
        rates[group].append((prompt + reasoning + completion) / seconds)
write("rq1.jsonl", rq1)

def summary(xs):
    q = statistics.quantiles(xs, n=4, method="inclusive")
    return {"count": len(xs), "mean": statistics.fmean(xs), "std": statistics.stdev(xs), "min": min(xs),
            "q25": q[0], "median": statistics.median(xs), "q75": q[2], "max": max(xs)}
with open(d + "mock/rq1_expected.json", "w") as f:
    json.dump({"time_scaled": {g: summary(v) for g, v in rates.items()},
               "smelly_to_clean_mean_ratio": statistics.fmean(rates["smelly"]) / statistics.fmean(rates["clean"])}, f, indent=2)
    f.write("\n")

# Shared tail for quality chains: regenerate each sample from its description.
def regen(samples):
    return [{"match": {"sample": s["id"], "task": "generate_from_doc"}, "output_text": fence(s["code"]),
             "usage": {"prompt_tokens": 120, "reasoning_tokens": 500, "completion_tokens": 150}, "seconds": 15.0}
            for s in samples]
describe = {"match": {"task": "describe_code"}, "output_text": "Validates the input and returns the computed result.",
            "usage": {"prompt_tokens": 200, "reasoning_tokens": 400, "completion_tokens": 60}, "seconds": 10.0}

# RQ4: the tips condition uses exactly 24.5% fewer tokens per sample.
rq4 = []
for i, s in enumerate(smelly):
    base = {"prompt_tokens": 200 * (2 + i), "reasoning_tokens": 200 * (10 + i), "completion_tokens": 200 * (3 + i)}
    tips = {k: v * 755 // 1000 for k, v in base.items()}
    assert all(v * 755 % 1000 == 0 for v in base.values())
    for label, usage in (("No Tips", base), ("With Tips", tips)):
        rq4.append({"match": {"sample": s["id"], "task": "refactor", "label": label}, "output_text": fence("{{input_code}}"),
                    "usage": usage, "seconds": 30.0})
write("rq4_tips.jsonl", rq4 + regen(smelly) + [describe])

# Generic script for the refactoring experiments: refactoring the original
# costs more than refactoring the refactored code.
generic = []
for i, s in enumerate(smelly + clean):
    for variant, scale in (("orig", 2), ("rf", 1)):
        generic.append({"match": {"sample": s["id"], "task": "refactor", "variant": variant}, "output_text": fence("{{input_code}}"),
                        "usage": {"prompt_tokens": 250 + 5 * i, "reasoning_tokens": scale * (800 + 60 * i), "completion_tokens": scale * (120 + 4 * i)},
                        "seconds": 25.0})
write("generic.jsonl", generic + regen(smelly + clean) + [describe, echo])

# RQ5: each strategy row scales the refactoring cost differently.
scales = {"Base": 100, "Context": 92, "Func": 95, "Total": 90, "DevOps": 104, "QAer": 98, "SEer": 97,
          "AbsCost": 70, "RelCost": 75, "Comb1": 72, "Comb2": 68}
rq5 = []
for i, s in enumerate(smelly):
    for label, pct in scales.items():
        rq5.append({"match": {"sample": s["id"], "task": "refactor", "label": label}, "output_text": fence("{{input_code}}"),
                    "usage": {"prompt_tokens": 300 + 10 * i, "reasoning_tokens": pct * (20 + i), "completion_tokens": pct * (4 + i) // 2},
                    "seconds": 30.0})
write("rq5.jsonl", rq5 + regen(smelly) + [describe])

# RQ3 oracle: growth of the original over its refactored counterpart, averaged
# per annotated smell kind.
growth = {}
for i, s in enumerate(smelly):
    orig = (250 + 5 * i) + 2 * (800 + 60 * i) + 2 * (120 + 4 * i)
    rf = (250 + 5 * i) + (800 + 60 * i) + (120 + 4 * i)
    for k in s["smells"]:
        growth.setdefault(k, []).append((orig - rf) / rf)
with open(d + "mock/rq3_expected.json", "w") as f:
    json.dump({k: {"mean": statistics.fmean(v), "samples": len(v)} for k, v in sorted(growth.items())}, f, indent=2)
    f.write("\n")
