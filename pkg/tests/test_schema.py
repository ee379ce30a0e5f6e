import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localgram.document import AnnotatedDoc, Annotation, tokenize
from localgram.schema import (AnnotatedTextError, AspectSpec, AspectValuePair, PairType, Polarity,
                              SchemaConfig, SchemaError, TopicCategory, derive_sentiment,
                              evaluation_triples, export_bio, parse_annotated, parse_schema,
                              serialize_schema, validate_label)


def test_demo_schema(demo_schema):
    assert set(demo_schema.topics) == {"CLO_TY", "CLO_BR", "CLO_ST", "CLO_SH", "CLO_PA"}
    types = {a.name: a.pair_type for a in demo_schema.aspects.values()}
    assert {t for t in types.values()} == set(PairType)
    assert types["LENGTH"] is PairType.BINARY


def test_validate_label(demo_schema):
    assert validate_label("LENGTH-SHORT", demo_schema) == AspectValuePair(
        "LENGTH", "SHORT", PairType.BINARY)
    assert validate_label("CLO_TY", demo_schema) == demo_schema.topics["CLO_TY"]
    for bad in ("LENGTH-PURPLE", "HEIGHT-SHORT", "NOPE"):
        with pytest.raises(SchemaError):
            validate_label(bad, demo_schema)


def test_sentiment(demo_schema):
    wp = validate_label("WATERPROOF-GOOD", demo_schema)
    assert derive_sentiment(wp, demo_schema) is Polarity.POS
    assert derive_sentiment(validate_label("WATERPROOF-BAD", demo_schema),
                            demo_schema) is Polarity.NEG
    assert derive_sentiment(validate_label("LENGTH-GOOD", demo_schema), demo_schema) is Polarity.POS
    assert derive_sentiment(validate_label("LENGTH-SHORT", demo_schema),
                            demo_schema) is Polarity.NONE


@pytest.mark.parametrize("bad", [
    "TOPIC lower case",
    "TOPIC A\nTOPIC A",
    "ASPECT X UNARY VALUES A,A",
    "ASPECT X TERNARY VALUES A",
    "ASPECT X UNARY LIST A",
    "ASPECT X UNARY VALUES A POLARITY B=POS",
    "ASPECT X UNARY VALUES A POLARITY A=MAYBE",
    "COLOUR X",
])
def test_bad_schema(bad):
    with pytest.raises(SchemaError):
        parse_schema(bad)


def test_triples(demo_schema):
    doc = parse_annotated("<ENT=CLO_TY>티셔츠</ENT>는 <LENGTH-SHORT>기장이 약간 짧네요</LENGTH-SHORT>.")
    (t,) = evaluation_triples(doc, demo_schema)
    assert t.topic == ("CLO_TY", "티셔츠")
    assert t.aspect_value.label == "LENGTH-SHORT"
    assert t.surface == "기장이 약간 짧네요"
    assert t.sentiment is Polarity.NONE


def test_parse_annotated_basic():
    doc = parse_annotated("<ENT=CLO_TY>티셔츠</ENT>는 <LENGTH-SHORT>기장이 짧네요</LENGTH-SHORT>.")
    assert doc.text == "티셔츠는 기장이 짧네요."
    assert [(a.start_token, a.end_token, a.label, a.attribute) for a in doc.annotations] == [
        (0, 2, "ENT", "CLO_TY"), (5, 11, "LENGTH-SHORT", None)]


def test_parse_annotated_trims_whitespace():
    doc = parse_annotated("가<X> 나 </X>다")
    assert doc.text == "가 나 다"
    assert doc.span_text(doc.annotations[0]) == "나"


@pytest.mark.parametrize("bad", [
    "<A>가<B>나</B></A>",
    "<A>가</B>",
    "</A>",
    "<A>가",
    "<A>가<B>나</A></B>",
    "<A=x>가</A=x>",
])
def test_parse_annotated_errors(bad):
    with pytest.raises(AnnotatedTextError):
        parse_annotated(bad)


def test_tag_inside_token_is_error():
    # "ab" is one latin token; a tag cannot split it
    with pytest.raises(AnnotatedTextError):
        parse_annotated("a<X>b</X>")


def test_export_bio():
    doc = parse_annotated("<ENT=CLO_TY>티셔츠</ENT>는 <LENGTH-SHORT>기장이 짧네요</LENGTH-SHORT>.")
    lines = export_bio(doc).split("\n")
    assert lines[:5] == ["티\tB-ENT", "셔\tI-ENT", "츠\tI-ENT", "는\tO", "⌴\tO"]
    assert lines[5:12] == ["기\tB-LENGTH-SHORT", "장\tI-LENGTH-SHORT", "이\tI-LENGTH-SHORT",
                           "⌴\tO", "짧\tI-LENGTH-SHORT", "네\tI-LENGTH-SHORT",
                           "요\tI-LENGTH-SHORT"]
    assert lines[12:] == [".\tO", "", ""]


def test_export_bio_empty():
    assert export_bio(parse_annotated("")) == "\n"


def test_export_bio_invariants(demo_rtn, demo_lexicon):
    from localgram.resources import DEMO, read_text
    for line in read_text(DEMO.golden).splitlines():
        doc = parse_annotated(line)
        out = export_bio(doc)
        rows = out.split("\n")[:-2]
        assert len(rows) == len(doc.tokens)
        labels = [r.split("\t")[1] for r in rows]
        for prev, cur in zip(["O"] + labels, labels):
            if cur.startswith("I-"):
                assert prev[2:] == cur[2:] or prev == "O"
        assert sum(label.startswith("B-") for label in labels) == len(doc.annotations)


# -- round trips ---------------------------------------------------------------

idents = st.from_regex(r"[A-Z][A-Z0-9_]{0,6}", fullmatch=True)


@st.composite
def schemas(draw):
    topics = draw(st.lists(idents, max_size=4, unique=True))
    cfg = SchemaConfig()
    for t in topics:
        desc = draw(st.sampled_from(["", "Cloth type", "브랜드 이름"]))
        cfg.topics[t] = TopicCategory(t, desc)
    for name in draw(st.lists(idents, max_size=4, unique=True)):
        values = draw(st.lists(idents, min_size=1, max_size=4, unique=True))
        ptype = draw(st.sampled_from(list(PairType)))
        pol = {}
        for v in values:
            if draw(st.booleans()):
                pol[v] = draw(st.sampled_from(list(Polarity)))
        cfg.aspects[name] = AspectSpec(name, ptype, values, pol)
    return cfg


@settings(max_examples=250, deadline=None)
@given(schemas())
def test_schema_round_trip(cfg):
    text = serialize_schema(cfg)
    back = parse_schema(text)
    assert back == cfg
    assert serialize_schema(back) == text


pieces = st.sampled_from(["가", "나", "다", "기장", " ", "  ", "!", ".", "ab", "12", "티셔츠"])
labels = st.sampled_from(["LENGTH-SHORT", "SIZE-GOOD", "X", "ENT"])


@st.composite
def annotated_docs(draw):
    text = "".join(draw(st.lists(pieces, max_size=12)))
    tokens = tokenize(text)
    words = [i for i, t in enumerate(tokens) if t.kind != "boundary"]
    anns = []
    cursor = 0
    while cursor < len(words) and draw(st.booleans()):
        a = draw(st.integers(cursor, len(words) - 1))
        b = draw(st.integers(a, min(len(words) - 1, a + 3)))
        label = draw(labels)
        attr = "CLO_TY" if label == "ENT" else None
        anns.append(Annotation(words[a], words[b], label, attr))
        cursor = b + 1
    return AnnotatedDoc(text, tokens, anns)


@settings(max_examples=300, deadline=None)
@given(annotated_docs())
def test_annotated_text_round_trip(doc):
    text = doc.serialize()
    back = parse_annotated(text)
    assert back == doc
    assert back.serialize() == text
