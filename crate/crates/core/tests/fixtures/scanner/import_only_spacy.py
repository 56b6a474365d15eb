# expect: none
import spacy

VERSION = spacy.__version__
