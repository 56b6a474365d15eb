# expect: P:stabilityai/stable-diffusion-2-1
import diffusers

REPO = "stabilityai/stable-diffusion-2-1"
pipe = diffusers.DiffusionPipeline.from_pretrained(REPO)
