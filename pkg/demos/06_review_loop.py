"""The human-curation loop without a browser: build a collision queue,
record decisions through the service's store, export, and assemble the
reviewed subset from exactly the accepted ids.

Run: python demos/06_review_loop.py
(For the interactive version: `strkit review-serve --queues <dir>
--decisions <dir> --images <root> --static frontend/dist` and open the
printed URL; keys a/r/s decide.)
"""
import tempfile
import time
from pathlib import Path

from strkit import synth
from strkit.benchmark import BenchmarkSpec, SubsetSpec, assemble
from strkit.consolidate import list_label_collisions
from strkit.manifest import DecisionRecord, content_digest, read_corpus
from strkit.review import ReviewStore, load_queue_file, write_queue_file

work = Path(tempfile.mkdtemp(prefix="strkit_review_"))
corpus_dir = work / "fixture"
corpus = synth.make_corpus(corpus_dir, n_images=40, seed=23)

instances = list(read_corpus(corpus.instances_path))
for inst in instances:
    inst.image_digest = content_digest(corpus.image_dir / inst.image_ref)

# Split off a small "benchmark": one instance per repeated label. Every
# remaining instance sharing a (case-folded) label becomes a candidate for
# manual review; the tool never auto-deletes them.
from collections import Counter

counts = Counter(inst.label.casefold() for inst in instances if inst.label)
repeated = {label for label, n in counts.items() if n >= 2}
benchmark, rest, seen = [], [], set()
for inst in instances:
    key = inst.label.casefold()
    if key in repeated and key not in seen:
        seen.add(key)
        benchmark.append(inst)
    else:
        rest.append(inst)
queue = list_label_collisions(rest, benchmark)
print(f"{len(queue)} collision candidates")

queues_dir = work / "queues"
queues_dir.mkdir()
write_queue_file(queue, queues_dir / "collisions.jsonl")

store = ReviewStore(queues_dir, work / "decisions", image_root=corpus.image_dir)

# A reviewer works through the queue: accept every second candidate.
accepted = []
for k, item in enumerate(store.items("collisions")):
    verdict = "accept" if k % 2 == 0 else "reject"
    if verdict == "accept":
        accepted.append(item.item_id)
    store.record("collisions",
                 DecisionRecord(item.item_id, verdict, "demo-reviewer", time.time()))
decided, total = store.progress("collisions")
print(f"progress: {decided}/{total}")

spec = BenchmarkSpec([
    SubsetSpec("collisions", "reviewed-candidates",
               candidates=str(queues_dir / "collisions.jsonl"),
               decisions=str(work / "decisions" / "collisions.decisions.jsonl")),
])
result = assemble(spec, rest, load_queue_items=load_queue_file)
subset = result.subsets[0]
print(f"reviewed subset holds exactly the accepted ids: {subset.ids == accepted}")
print(f"train split excludes them: {set(result.train_ids).isdisjoint(subset.ids)}")
