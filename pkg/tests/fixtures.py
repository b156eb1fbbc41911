"""Shared catalog-scale fixture: a bibliographic dataset with seven
browsable categories, one fully-detailed article (authors, identifier,
container issue, a two-snapshot history), and a searchable agent pool.

Category counts are the reference values asserted by the acceptance
suite; keep them stable."""

from datetime import datetime, timedelta, timezone

from palimpsest.delta import Delta
from palimpsest.display import parse_config
from palimpsest.provenance import ProvenanceChain, chain_to_quads, record_snapshot
from palimpsest.service import CurationService
from palimpsest.shapes import parse_shapes
from palimpsest.store import MemoryStore
from palimpsest.terms import Quad, iri, literal
from palimpsest.turtle import parse_turtle

from test_display import LISTING_YAML

FABIO = "http://purl.org/spar/fabio/"
DCTERMS = "http://purl.org/dc/terms/"
FOAF = "http://xmlns.com/foaf/0.1/"
PRO = "http://purl.org/spar/pro/"
DATACITE = "http://purl.org/spar/datacite/"
LITERALREIF = "http://www.essepuntato.it/2010/06/literalreification/"
FRBR = "http://purl.org/vocab/frbr/core#"
RDF_TYPE = iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

ARTICLE = "https://w3id.org/oc/meta/br/062501777134"
MONTANARI = "https://w3id.org/oc/meta/ra/09110155"
CURATOR = "https://orcid.org/0009-0002-5790-4804"
ZENODO_SOURCE = "https://doi.org/10.5281/zenodo.13768531"
T0 = datetime(2024, 11, 1, 9, 0, 0, 0, tzinfo=timezone.utc)

# (class IRI, catalog label, instance count)
CATEGORIES = [
    (FABIO + "BookChapter", "Article in Book", 153),
    (FABIO + "JournalIssue", "Issue", 25),
    (FABIO + "Journal", "Journal", 27),
    (FABIO + "JournalArticle", "Journal Article", 77),
    (FABIO + "Book", "Monograph", 66),
    (FABIO + "ProceedingsPaper", "Proceedings Paper", 10),
    (FABIO + "JournalVolume", "Volume", 62),
]

EXTRA_RULES = """
- class: "http://purl.org/spar/fabio/BookChapter"
  priority: 1
  displayName: "Article in Book"
- class: "http://purl.org/spar/fabio/JournalIssue"
  priority: 1
  displayName: "Issue"
- class: "http://purl.org/spar/fabio/Journal"
  priority: 1
  displayName: "Journal"
- class: "http://purl.org/spar/fabio/Book"
  priority: 1
  displayName: "Monograph"
- class: "http://purl.org/spar/fabio/ProceedingsPaper"
  priority: 1
  displayName: "Proceedings Paper"
- class: "http://purl.org/spar/fabio/JournalVolume"
  priority: 1
  displayName: "Volume"
- class: "http://purl.org/spar/datacite/Identifier"
  priority: 1
  shouldBeDisplayed: false
  displayName: "Identifier"
- class: "http://xmlns.com/foaf/0.1/Agent"
  priority: 1
  shouldBeDisplayed: false
  displayName: "Responsible Agent"
  displayProperties:
  - property: "http://xmlns.com/foaf/0.1/name"
    displayName: "Name"
    supportsSearch: true
"""

SHAPES_TTL = """
@prefix sh: <http://www.w3.org/ns/shacl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .

<urn:shape:JournalArticle> a sh:NodeShape ;
  sh:targetClass <http://purl.org/spar/fabio/JournalArticle> ;
  sh:property [
    sh:path <http://purl.org/dc/terms/title> ;
    sh:datatype xsd:string ;
    sh:minCount 1 ;
    sh:maxCount 1 ;
  ] ;
  sh:property [
    sh:path <http://purl.org/spar/datacite/hasIdentifier> ;
    sh:class <http://purl.org/spar/datacite/Identifier> ;
  ] ;
  sh:property [
    sh:path <http://purl.org/spar/pro/isDocumentContextFor> ;
    sh:class <http://xmlns.com/foaf/0.1/Agent> ;
  ] ;
  sh:property [
    sh:path <http://purl.org/spar/fabio/hasPublicationYear> ;
    sh:or ( [ sh:datatype xsd:gYear ] [ sh:datatype xsd:date ] ) ;
  ] .

<urn:shape:Agent> a sh:NodeShape ;
  sh:targetClass <http://xmlns.com/foaf/0.1/Agent> ;
  sh:property [
    sh:path <http://xmlns.com/foaf/0.1/name> ;
    sh:datatype xsd:string ;
    sh:minCount 1 ;
  ] .
"""

AGENT_NAMES = [
    (MONTANARI, "Franco Montanari"),
    ("https://w3id.org/oc/meta/ra/0601", "Francesca Rossi"),
    ("https://w3id.org/oc/meta/ra/0602", "Gian Franco Ferrari"),
    ("https://w3id.org/oc/meta/ra/0603", "Silvio Peroni"),
    ("https://w3id.org/oc/meta/ra/0604", "David Shotton"),
]


def article_quads():
    """The detailed article: title, two authors, a DOI, a container chain."""
    br = iri(ARTICLE)
    role1, role2 = iri("urn:role:peroni"), iri("urn:role:shotton")
    peroni = iri("https://w3id.org/oc/meta/ra/0603")
    shotton = iri("https://w3id.org/oc/meta/ra/0604")
    ident = iri("https://w3id.org/oc/meta/id/0605")
    volume = iri("https://example.org/journalvolume/1")
    issue = iri("https://example.org/journalissue/1")
    return {
        Quad(br, RDF_TYPE, iri(FABIO + "JournalArticle")),
        Quad(br, iri(DCTERMS + "title"),
             literal("OpenCitations, an infrastructure organization for open scholarship")),
        Quad(br, iri(PRO + "isDocumentContextFor"), role1),
        Quad(br, iri(PRO + "isDocumentContextFor"), role2),
        Quad(role1, iri(PRO + "withRole"), iri(PRO + "author")),
        Quad(role1, iri(PRO + "isHeldBy"), peroni),
        Quad(role2, iri(PRO + "withRole"), iri(PRO + "author")),
        Quad(role2, iri(PRO + "isHeldBy"), shotton),
        Quad(peroni, iri(FOAF + "familyName"), literal("Peroni")),
        Quad(shotton, iri(FOAF + "familyName"), literal("Shotton")),
        Quad(br, iri(DATACITE + "hasIdentifier"), ident),
        Quad(ident, RDF_TYPE, iri(DATACITE + "Identifier")),
        Quad(ident, iri(DATACITE + "usesIdentifierScheme"), iri(DATACITE + "doi")),
        Quad(ident, iri(LITERALREIF + "hasLiteralValue"), literal("10.1515/9783110354348-019")),
        Quad(br, iri(FRBR + "partOf"), volume),
        Quad(volume, iri(FRBR + "partOf"), issue),
        Quad(issue, iri(DCTERMS + "title"), literal("Issue 1")),
    }


def build_catalog(scale: int = 1) -> CurationService:
    """Build the full service over in-memory stores. ``scale`` multiplies
    the synthetic per-class counts (the detailed entities stay fixed)."""
    data, prov = MemoryStore(), MemoryStore()
    quads = set()
    for class_iri, label, count in CATEGORIES:
        local = class_iri.rsplit("/", 1)[1].lower()
        synthetic = count * scale
        if class_iri == FABIO + "JournalArticle":
            synthetic -= 1  # the detailed article is one of these
        if class_iri == FABIO + "JournalIssue":
            synthetic -= 1  # the article's container is one of these
        if class_iri == FABIO + "JournalVolume":
            synthetic -= 1  # the article's volume
        for i in range(1, synthetic + 1):
            e = iri(f"https://example.org/{local}/{i + 1000}")
            quads.add(Quad(e, RDF_TYPE, iri(class_iri)))
            quads.add(Quad(e, iri(DCTERMS + "title"), literal(f"{label} {i:04d}")))
    quads |= article_quads()
    quads.add(Quad(iri("https://example.org/journalissue/1"), RDF_TYPE, iri(FABIO + "JournalIssue")))
    quads.add(Quad(iri("https://example.org/journalvolume/1"), RDF_TYPE, iri(FABIO + "JournalVolume")))
    for agent_iri, name in AGENT_NAMES:
        quads.add(Quad(iri(agent_iri), RDF_TYPE, iri(FOAF + "Agent")))
        quads.add(Quad(iri(agent_iri), iri(FOAF + "name"), literal(name)))

    # the detailed article carries a two-snapshot history: creation, then
    # an enrichment adding an abstract and a keyword
    br = iri(ARTICLE)
    abstract = Quad(br, iri(DCTERMS + "abstract"),
                    literal("An infrastructure organization for open scholarship."))
    keyword = Quad(br, iri(PRO + "relatesToKeyword"), literal("author>Homerus"))
    article_subject_quads = {q for q in article_quads() | {abstract, keyword} if q.subject == br}
    creation = frozenset(article_subject_quads - {abstract, keyword})
    chain = record_snapshot(
        ProvenanceChain(ARTICLE), Delta(insertions=creation), CURATOR, None,
        "created", T0,
    )
    chain = record_snapshot(
        chain, Delta(insertions={abstract, keyword}), CURATOR, ZENODO_SOURCE,
        "The entity was modified.", T0 + timedelta(days=30),
    )
    quads |= {abstract, keyword}
    data.load_quads(quads)
    prov.load_quads(chain_to_quads(chain))

    rules = parse_config(LISTING_YAML + EXTRA_RULES)
    schemas = parse_shapes(parse_turtle(SHAPES_TTL))
    return CurationService(
        data,
        prov,
        rules=rules,
        schemas=schemas,
        base_iri="https://example.org",
        prefixes={"omid": "https://w3id.org/oc/meta/"},
    )
