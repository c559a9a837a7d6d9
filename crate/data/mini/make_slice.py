"""Writes conceptnet_slice.tsv: a small music/people edge set in
subject<TAB>relation<TAB>object<TAB>weight form.

The output is deterministic. Besides clean edges it contains lines with
unknown relations, exact and reweighted duplicates, and malformed rows, so
the ingest counters have something to count.
"""

import itertools
import random

rng = random.Random(20230101)
edges = []


def add(s, r, o, w=1.0):
    edges.append((s, r, o, w))


# taxonomy
families = {
    "brass_instrument": ["trombone", "trumpet", "tuba", "horn"],
    "string_instrument": ["guitar", "violin", "cello", "bass", "harp"],
    "woodwind_instrument": ["flute", "clarinet", "oboe", "saxophone"],
    "percussion_instrument": ["drum", "cymbal", "xylophone", "tambourine"],
    "keyboard_instrument": ["piano", "organ", "keyboard"],
}
for fam, members in families.items():
    add(fam, "IsA", "instrument", 2.0)
    for m in members:
        add(m, "IsA", fam, 2.0)
        add(m, "UsedFor", "music", 1.5)
        add(m, "AtLocation", "orchestra", 1.0)
    for a, b in itertools.combinations(members, 2):
        add(a, "SimilarTo", b, 1.2)
for a, b in itertools.combinations(families, 2):
    add(a, "DistinctFrom", b, 1.0)

people = ["boy", "girl", "man", "woman", "child", "baby"]
roles = ["singer", "drummer", "teacher", "conductor", "pianist", "guitarist",
         "violinist", "dancer", "student", "musician", "waiter", "doctor"]
for p in people + roles:
    add(p, "IsA", "person", 2.0)
add("boy", "Antonym", "girl", 2.0)
add("man", "Antonym", "woman", 2.0)
add("child", "DistinctFrom", "adult", 1.0)
for a, b in [("boy", "man"), ("girl", "woman"), ("boy", "child"), ("girl", "child")]:
    add(a, "RelatedTo", b, 1.5)
for a, b in itertools.combinations(roles[:10], 2):
    if rng.random() < 0.5:
        add(a, "DistinctFrom", b, 1.0)
for a, b in [("singer", "dancer"), ("drummer", "guitarist"), ("pianist", "violinist"),
             ("teacher", "student"), ("conductor", "musician")]:
    add(a, "RelatedTo", b, 1.4)
for role, inst in [("drummer", "drum"), ("pianist", "piano"), ("guitarist", "guitar"),
                   ("violinist", "violin"), ("singer", "microphone"), ("conductor", "baton")]:
    add(role, "CapableOf", "play_" + inst if role != "conductor" else "lead_orchestra", 1.0)
    add(inst, "RelatedTo", role, 1.2)
for g, members in [("people", ["crowd", "audience", "band", "choir", "couple", "family"]),
                   ("band", ["orchestra", "choir", "group"])]:
    for m in members:
        add(g, "RelatedTo", m, 1.3)
add("people", "DistinctFrom", "animals", 1.0)
add("people", "SimilarTo", "crowd", 1.5)
add("audience", "SimilarTo", "crowd", 1.5)
add("orchestra", "IsA", "band", 1.0)
add("choir", "IsA", "group", 1.0)
add("choir", "UsedFor", "singing", 1.0)
add("orchestra", "HasProperty", "large", 1.0)
add("couple", "DistinctFrom", "crowd", 1.0)

# places
places = ["stage", "hall", "concert_hall", "theater", "church", "park", "street",
          "room", "kitchen", "school", "studio", "bar", "beach", "floor", "window"]
for a, b in itertools.combinations(places, 2):
    if rng.random() < 0.45:
        add(a, "DistinctFrom", b, 1.0)
for a, b in [("stage", "theater"), ("concert_hall", "theater"), ("hall", "room"),
             ("church", "school"), ("park", "street"), ("floor", "stage"), ("window", "door")]:
    add(a, "SimilarTo", b, 1.3)
for inst in ["piano", "guitar", "drum", "microphone", "violin", "trumpet", "flute", "cello", "bass"]:
    add(inst, "AtLocation", "stage", 1.1)
    add(inst, "AtLocation", "studio", 0.9)
add("piano", "AtLocation", "church", 1.0)
add("organ", "AtLocation", "church", 1.5)
add("choir", "AtLocation", "church", 1.5)
add("orchestra", "AtLocation", "concert_hall", 1.5)
add("band", "AtLocation", "bar", 1.0)
add("theater", "UsedFor", "performance", 1.5)
add("church", "UsedFor", "worship", 1.5)
add("park", "HasProperty", "green", 1.0)
add("street", "HasProperty", "busy", 1.0)

# objects and materials
things = {"microphone": ["speaker", "headphones", "cable", "radio"],
          "baton": ["stick", "pencil", "wand"],
          "drumstick": ["stick", "spoon", "brush"],
          "song": ["melody", "poem", "story", "dance"],
          "music": ["noise", "silence", "sound", "rhythm"],
          "book": ["magazine", "newspaper"],
          "seat": ["chair", "bench", "sofa"]}
for t, near in things.items():
    for n in near:
        add(t, "SimilarTo", n, 1.1)
    add(t, "RelatedTo", "music", 0.8)
add("trombone", "MadeOf", "brass", 1.5)
add("trumpet", "MadeOf", "metal", 1.5)
add("guitar", "MadeOf", "wood", 1.5)
add("violin", "MadeOf", "wood", 1.5)
add("drum", "MadeOf", "skin", 1.0)
add("piano", "HasA", "keys", 1.5)
add("guitar", "HasA", "strings", 1.5)
add("trombone", "HasProperty", "loud", 1.2)
add("flute", "HasProperty", "quiet", 1.0)
add("microphone", "UsedFor", "singing", 1.5)
add("song", "CreatedBy", "composer", 1.0)
add("music", "Causes", "dancing", 1.0)
add("clapping", "SymbolOf", "approval", 1.0)

# predicates: prepositions
preps = ["in_front_of", "behind", "next_to", "near", "beside", "under", "above",
         "on", "in", "at", "inside", "outside", "far_from", "on_top_of", "across_from"]
add("in_front_of", "Antonym", "behind", 2.0)
add("on", "Antonym", "under", 2.0)
add("inside", "Antonym", "outside", 2.0)
add("near", "Antonym", "far_from", 2.0)
add("above", "Antonym", "under", 2.0)
for a, b in itertools.combinations(preps, 2):
    if rng.random() < 0.4:
        add(a, "DistinctFrom", b, 1.0)
for p in ["in_front_of", "near", "in", "on", "at", "behind"]:
    for q in ["beside", "next_to", "under", "across_from", "outside", "above"]:
        if p != q:
            add(p, "DistinctFrom", q, 0.9)

# predicates: verbs
verbs = {"play": ["hold", "carry", "drop", "watch", "clean"],
         "stand": ["sit", "lie", "walk", "lean", "wait"],
         "sit": ["stand", "lie", "sleep", "rest"],
         "hold": ["drop", "throw", "carry", "push", "pull"],
         "sing": ["shout", "speak", "yell", "whisper", "laugh"],
         "smile": ["cry", "laugh", "shout", "stare"],
         "carry": ["drop", "push", "pull", "throw", "kick"],
         "clap": ["wave", "cheer", "point", "shake"],
         "dance": ["walk", "run", "jump", "sit", "fall"],
         "watch": ["ignore", "follow", "hear", "greet", "visit"],
         "like": ["hate", "want", "need"],
         "enjoy": ["hate", "dislike"],
         "admire": ["ignore", "follow", "help"],
         "tune": ["fix", "break", "clean", "sell"],
         "teach": ["learn", "study", "help"],
         "cheer": ["cry", "shout", "wave"],
         "finish": ["start", "leave", "practice"],
         "pack": ["open", "clean", "sell", "carry"]}
for v, others in verbs.items():
    for i, o in enumerate(others):
        rel = "Antonym" if i == 0 else "DistinctFrom"
        add(v, rel, o, 1.5 - 0.1 * i)
    add(v, "RelatedTo", "music" if v in ("play", "sing", "dance", "tune", "clap") else "action", 0.7)

# everyday filler around the same vocabulary
filler = ["sound", "rhythm", "melody", "concert", "show", "ticket", "lights", "audience",
          "applause", "practice", "lesson", "note", "score", "sheet_music", "case", "bow",
          "strings", "keys", "record", "radio"]
for a, b in itertools.combinations(filler, 2):
    if rng.random() < 0.12:
        add(a, "RelatedTo", b, round(0.5 + rng.random(), 2))
for f in filler:
    add(f, "RelatedTo", "music", round(0.5 + rng.random(), 2))
add("concert", "HasSubevent", "applause", 1.0)
add("lesson", "UsedFor", "learning", 1.0)
add("student", "Desires", "learning", 1.0)
add("teacher", "CapableOf", "teach", 1.5)
add("ticket", "UsedFor", "concert", 1.0)
add("case", "UsedFor", "carrying", 1.0)
add("cello", "HasA", "bow", 1.0)

lines = [f"{s}\t{r}\t{o}\t{w:g}" for s, r, o, w in edges]

# exact duplicates and reweighted duplicates
for s, r, o, w in edges[:: max(1, len(edges) // 12)][:12]:
    lines.append(f"{s}\t{r}\t{o}\t{w + 0.5:g}")
lines.append(lines[0])
lines.append(lines[1])

# relations outside the supported set
for s, o in [("guitar", "rock"), ("trombone", "jazz"), ("piano", "classical"),
             ("violin", "stradivarius"), ("drum", "drummer_boy"), ("singer", "opera"),
             ("choir", "gospel"), ("band", "beatles")]:
    lines.append(f"{s}\t/r/dbpedia/genre\t{o}\t1")
lines.append("music\tExternalURL\thttp://example.org/music\t1")
lines.append("song\tNotCapableOf\tfly\t1")

# malformed rows
lines.append("only_one_column")
lines.append("two\tcolumns")
lines.append("flute\tIsA\twoodwind_instrument\tnot_a_weight")

order = list(range(len(lines)))
rng.shuffle(order)
with open("conceptnet_slice.tsv", "w") as f:
    f.write("# subject\trelation\tobject\tweight\n")
    for i in order:
        f.write(lines[i] + "\n")
print(len(lines), "lines")
