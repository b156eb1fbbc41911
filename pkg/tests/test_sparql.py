"""Embedded query engine tests, including the display-config queries
that the whole catalog experience rides on."""

import pytest

from palimpsest.store import MemoryStore
from palimpsest.terms import Quad, Term, iri, literal, typed

DCTERMS = "http://purl.org/dc/terms/"
FABIO = "http://purl.org/spar/fabio/"
FOAF = "http://xmlns.com/foaf/0.1/"
PRO = "http://purl.org/spar/pro/"
DATACITE = "http://purl.org/spar/datacite/"
LITERAL = "http://www.essepuntato.it/2010/06/literalreification/"
FRBR = "http://purl.org/vocab/frbr/core#"
RDF_TYPE = iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def q(s, p, o, g=None):
    return Quad(s, p, o, g)


def build_article_store():
    """One article with two authors, an identifier, and a container issue."""
    store = MemoryStore()
    br = iri("https://w3id.org/oc/meta/br/062501777134")
    role1, role2 = iri("urn:role:1"), iri("urn:role:2")
    peroni, shotton = iri("urn:ra:peroni"), iri("urn:ra:shotton")
    ident = iri("urn:id:1")
    volume, issue = iri("urn:br:volume"), iri("urn:br:issue")
    store.load_quads(
        {
            q(br, RDF_TYPE, iri(FABIO + "JournalArticle")),
            q(br, iri(DCTERMS + "title"), literal("OpenCitations, an infrastructure organization for open scholarship")),
            q(br, iri(PRO + "isDocumentContextFor"), role1),
            q(br, iri(PRO + "isDocumentContextFor"), role2),
            q(role1, iri(PRO + "withRole"), iri(PRO + "author")),
            q(role1, iri(PRO + "isHeldBy"), peroni),
            q(role2, iri(PRO + "withRole"), iri(PRO + "author")),
            q(role2, iri(PRO + "isHeldBy"), shotton),
            q(peroni, iri(FOAF + "familyName"), literal("Peroni")),
            q(shotton, iri(FOAF + "familyName"), literal("Shotton")),
            q(br, iri(DATACITE + "hasIdentifier"), ident),
            q(ident, iri(DATACITE + "usesIdentifierScheme"), iri(DATACITE + "doi")),
            q(ident, iri(LITERAL + "hasLiteralValue"), literal("10.1515/9783110354348-019")),
            q(br, iri(FRBR + "partOf"), volume),
            q(volume, iri(FRBR + "partOf"), issue),
            q(issue, RDF_TYPE, iri(FABIO + "JournalIssue")),
            q(issue, iri(DCTERMS + "title"), literal("Issue 1")),
        }
    )
    return store, br


@pytest.fixture
def article_store():
    return build_article_store()


URI_DISPLAY_QUERY = """
PREFIX dcterms: <http://purl.org/dc/terms/>
PREFIX fabio: <http://purl.org/spar/fabio/>
PREFIX foaf: <http://xmlns.com/foaf/0.1/>
PREFIX pro: <http://purl.org/spar/pro/>
SELECT ?display
WHERE {
  %(uri)s dcterms:title ?title .
  OPTIONAL {SELECT (GROUP_CONCAT(?authorName; SEPARATOR = " & ")
    AS ?authorList)
    WHERE {
      %(uri)s pro:isDocumentContextFor ?authorRole .
      ?authorRole pro:withRole pro:author ;
        pro:isHeldBy ?author .
      ?author foaf:familyName ?authorName .
    }
  }
  BIND(CONCAT(
    COALESCE(?authorList, ""),
    IF(BOUND(?authorList), ". ", ""),
    ?title
  ) AS ?display)
}
"""

IDENTIFIER_QUERY = """
PREFIX datacite: <http://purl.org/spar/datacite/>
PREFIX literal:
  <http://www.essepuntato.it/2010/06/literalreification/>
SELECT (CONCAT(STRAFTER(STR(?scheme), "datacite/"), ":",
  ?literal) AS ?id) ?identifier
WHERE {
  %(uri)s datacite:hasIdentifier ?identifier.
  ?identifier datacite:usesIdentifierScheme ?scheme;
    literal:hasLiteralValue ?literal.
}
"""

ISSUE_QUERY = """
PREFIX frbr: <http://purl.org/vocab/frbr/core#>
PREFIX dcterms: <http://purl.org/dc/terms/>
PREFIX fabio: <http://purl.org/spar/fabio/>
SELECT ?containerName ?container
WHERE {
  %(uri)s frbr:partOf+ ?container.
  ?container a fabio:JournalIssue.
  ?container dcterms:title ?containerName.
}
"""


class TestDisplayQueries:
    def test_uri_display_with_authors(self, article_store):
        store, br = article_store
        result = store.select(URI_DISPLAY_QUERY % {"uri": f"<{br.value}>"})
        assert len(result) == 1
        assert result.first("display").value == (
            "Peroni & Shotton. OpenCitations, an infrastructure organization for open scholarship"
        )

    def test_uri_display_without_authors_uses_coalesce_branch(self):
        store = MemoryStore()
        br = iri("urn:br:solo")
        store.load_quads({q(br, iri(DCTERMS + "title"), literal("Lonely Title"))})
        result = store.select(URI_DISPLAY_QUERY % {"uri": f"<{br.value}>"})
        assert result.first("display").value == "Lonely Title"

    def test_uri_display_missing_title_yields_no_rows(self):
        store = MemoryStore()
        result = store.select(URI_DISPLAY_QUERY % {"uri": "<urn:br:absent>"})
        assert len(result) == 0

    def test_identifier_scheme_and_value_concatenation(self, article_store):
        store, br = article_store
        result = store.select(IDENTIFIER_QUERY % {"uri": f"<{br.value}>"})
        assert result.first("id").value == "doi:10.1515/9783110354348-019"
        assert result.first("identifier") == iri("urn:id:1")

    def test_transitive_part_of_path_finds_issue(self, article_store):
        store, br = article_store
        result = store.select(ISSUE_QUERY % {"uri": f"<{br.value}>"})
        assert len(result) == 1
        assert result.first("containerName").value == "Issue 1"


class TestEngineBasics:
    def test_empty_store_zero_rows(self):
        store = MemoryStore()
        assert len(store.select("SELECT ?s WHERE { ?s ?p ?o }")) == 0

    def test_count_by_class_matches_brute_force(self):
        store = MemoryStore()
        classes = {"A": 7, "B": 3, "C": 11}
        quads = set()
        for name, n in classes.items():
            for i in range(n):
                quads.add(q(iri(f"urn:e:{name}{i}"), RDF_TYPE, iri(f"urn:c:{name}")))
        store.load_quads(quads)
        # independent oracle: count straight over the fixture quads
        expected = {}
        for quad in quads:
            expected[quad.object.value] = expected.get(quad.object.value, 0) + 1
        result = store.select(
            "SELECT ?class (COUNT(DISTINCT ?s) AS ?n) WHERE { ?s a ?class } GROUP BY ?class"
        )
        got = {row["class"].value: int(row["n"].value) for row in result}
        assert got == expected

    def test_order_by_limit_offset(self):
        store = MemoryStore()
        store.load_quads({q(iri(f"urn:e:{i}"), iri("urn:p:n"), typed(str(i), "integer")) for i in range(10)})
        res = store.select(
            "SELECT ?s ?n WHERE { ?s <urn:p:n> ?n } ORDER BY DESC(?n) LIMIT 3 OFFSET 2"
        )
        assert [int(r["n"].value) for r in res] == [7, 6, 5]

    def test_filter_regex_contains_lcase(self):
        store = MemoryStore()
        store.load_quads(
            {
                q(iri("urn:e:1"), iri("urn:p:t"), literal("Franco Montanari")),
                q(iri("urn:e:2"), iri("urn:p:t"), literal("Filippomaria Pontani")),
            }
        )
        res = store.select(
            'SELECT ?s WHERE { ?s <urn:p:t> ?t . FILTER(CONTAINS(LCASE(STR(?t)), "franco")) }'
        )
        assert [r["s"].value for r in res] == ["urn:e:1"]
        res = store.select('SELECT ?s WHERE { ?s <urn:p:t> ?t . FILTER REGEX(?t, "^F.*i$") }')
        assert {r["s"].value for r in res} == {"urn:e:1", "urn:e:2"}

    def test_graph_patterns(self):
        store = MemoryStore()
        store.load_quads(
            {
                q(iri("urn:s"), iri("urn:p"), literal("default")),
                q(iri("urn:s"), iri("urn:p"), literal("named"), iri("urn:g:1")),
            }
        )
        res = store.select("SELECT ?o WHERE { ?s <urn:p> ?o }")
        assert [r["o"].value for r in res] == ["default"]
        res = store.select("SELECT ?o WHERE { GRAPH <urn:g:1> { ?s <urn:p> ?o } }")
        assert [r["o"].value for r in res] == ["named"]
        res = store.select("SELECT ?g WHERE { GRAPH ?g { ?s ?p ?o } }")
        assert [r["g"].value for r in res] == ["urn:g:1"]

    def test_optional_leaves_unbound(self):
        store = MemoryStore()
        store.load_quads(
            {
                q(iri("urn:e:1"), iri("urn:p:a"), literal("x")),
                q(iri("urn:e:1"), iri("urn:p:b"), literal("y")),
                q(iri("urn:e:2"), iri("urn:p:a"), literal("z")),
            }
        )
        res = store.select(
            "SELECT ?s ?b WHERE { ?s <urn:p:a> ?a . OPTIONAL { ?s <urn:p:b> ?b } } ORDER BY ?s"
        )
        assert len(res) == 2
        assert res.rows[0]["b"].value == "y"
        assert "b" not in res.rows[1]

    def test_deterministic_results_with_order_by(self, article_store):
        store, br = article_store
        query = "SELECT ?s ?p ?o WHERE { ?s ?p ?o } ORDER BY ?s ?p ?o"
        assert store.select(query).rows == store.select(query).rows

    def test_distinct(self):
        store = MemoryStore()
        store.load_quads(
            {
                q(iri("urn:e:1"), iri("urn:p:a"), literal("x")),
                q(iri("urn:e:1"), iri("urn:p:b"), literal("x")),
            }
        )
        res = store.select("SELECT DISTINCT ?o WHERE { ?s ?p ?o }")
        assert len(res) == 1

    def test_strstarts_and_bind(self):
        store = MemoryStore()
        store.load_quads({q(iri("urn:e:1"), iri("urn:p:t"), literal("hello world"))})
        res = store.select(
            'SELECT ?u WHERE { ?s <urn:p:t> ?t . BIND(UCASE(?t) AS ?u) . FILTER(STRSTARTS(?t, "hello")) }'
        )
        assert res.first("u").value == "HELLO WORLD"
