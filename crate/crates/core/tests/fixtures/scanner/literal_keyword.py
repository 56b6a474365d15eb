# expect: L:distilbert-base-uncased
import transformers

m = transformers.AutoModel.from_pretrained(pretrained_model_name_or_path="distilbert-base-uncased")
