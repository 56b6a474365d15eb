from transformers import pipeline

nli = pipeline("zero-shot-classification", model="facebook/bart-large-mnli")
